"""Grid graph constraints, lattice recovery, and canonical board ordering."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .edges import EdgeCandidate, angular_distance_pi
from .scales import CornerTrack

_RULE3_MAX_GAP = 0.75 * math.pi
_VOTE_MIN_SEPARATION = 0.25 * math.pi


@dataclass
class CornerGraph:
    """Mutual adjacency over detected corners with per-edge scores."""

    corners: list[CornerTrack]
    adj: dict[int, dict[int, float]] = field(default_factory=dict)

    def node_ids(self) -> list[int]:
        return sorted(self.adj)

    def neighbors(self, i: int) -> list[int]:
        return sorted(self.adj.get(i, {}))

    def degree(self, i: int) -> int:
        return len(self.adj.get(i, {}))

    def remove_edge(self, i: int, j: int) -> None:
        self.adj.get(i, {}).pop(j, None)
        self.adj.get(j, {}).pop(i, None)

    def remove_node(self, i: int) -> None:
        for j in list(self.adj.get(i, {})):
            self.adj[j].pop(i, None)
        self.adj.pop(i, None)

    def copy(self) -> "CornerGraph":
        return CornerGraph(self.corners, {i: dict(n) for i, n in self.adj.items()})


def build_graph(corners: list[CornerTrack], edges: list[EdgeCandidate]) -> CornerGraph:
    """Adjacency from accepted edge candidates, entered in both directions."""
    adj: dict[int, dict[int, float]] = {i: {} for i in range(len(corners))}
    for e in edges:
        if not e.accepted:
            continue
        adj[e.i][e.j] = e.score
        adj[e.j][e.i] = e.score
    return CornerGraph(corners, adj)


def _direction(g: CornerGraph, i: int, j: int) -> float:
    a, b = g.corners[i], g.corners[j]
    return math.atan2(b.y - a.y, b.x - a.x)


def _full_circle_distance(a: float, b: float) -> float:
    d = abs(a - b) % (2.0 * math.pi)
    return min(d, 2.0 * math.pi - d)


def _vote_strength(g: CornerGraph, i: int, j: int) -> float:
    # Edge scores divide by the summed corner contrasts, which inflates
    # edges that touch one weak (often spurious) corner. Rescaling by
    # (ca + cb) / (2 * max(ca, cb)) restores a per-strong-corner scale, so
    # a genuine edge between two solid corners outranks a phantom edge
    # propped up by a faint one. The factor is contrast-ratio only, so
    # affine lighting changes cancel out.
    score = g.adj[i][j]
    ca = g.corners[i].contrast
    cb = g.corners[j].contrast
    top = max(ca, cb)
    if top <= 0.0:
        return score
    return score * (ca + cb) / (2.0 * top)


def resolve_votes(
    g: CornerGraph,
    geometry_weight: float = 1.0,
    min_separation: float = _VOTE_MIN_SEPARATION,
) -> CornerGraph:
    """Trim ambiguous corners by a per-corner vote.

    A corner is ambiguous when it has more than four connections or when
    two of its connections run within ``min_separation`` of the same
    direction (two lattice edges cannot). Ambiguous corners rank their
    connections by a contrast-balanced edge score plus a continuation
    bonus (alignment with the reverse of some other connection, see
    ``_vote_strength``) and greedily keep up to four
    that stay angularly separated. A connection survives only if both
    endpoints kept it. Exact score ties between angular competitors drop
    both, staying conservative. Graphs without ambiguity come back
    unchanged.
    """
    votes: dict[int, set[int]] = {}
    for c in g.node_ids():
        nbrs = g.neighbors(c)
        dirs = {n: _direction(g, c, n) for n in nbrs}
        crowded = any(
            _full_circle_distance(dirs[nbrs[a]], dirs[nbrs[b]]) < min_separation
            for a in range(len(nbrs))
            for b in range(a + 1, len(nbrs))
        )
        if len(nbrs) <= 4 and not crowded:
            votes[c] = set(nbrs)
            continue
        combined = {}
        for n in nbrs:
            bonus = 0.0
            for m in nbrs:
                if m == n:
                    continue
                align = math.cos(dirs[n] - (dirs[m] + math.pi))
                bonus = max(bonus, align)
            combined[n] = _vote_strength(g, c, n) + geometry_weight * max(0.0, bonus)
        order = sorted(nbrs, key=lambda n: (-combined[n], n))
        accepted: list[int] = []
        dropped: set[int] = set()
        for n in order:
            if n in dropped or len(accepted) == 4:
                continue
            clash = [
                m for m in accepted if _full_circle_distance(dirs[n], dirs[m]) < min_separation
            ]
            if clash:
                tied = [m for m in clash if combined[m] == combined[n]]
                if tied:
                    accepted = [m for m in accepted if m not in tied]
                    dropped.update(tied)
                    dropped.add(n)
                continue
            accepted.append(n)
        votes[c] = set(accepted)
    out = CornerGraph(g.corners, {i: {} for i in g.adj})
    for c in g.node_ids():
        for n in g.neighbors(c):
            if n in votes.get(c, set()) and c in votes.get(n, set()):
                out.adj[c][n] = g.adj[c][n]
    return out


def prune_constraints(g: CornerGraph, rule3_max_gap: float = _RULE3_MAX_GAP) -> CornerGraph:
    """Iterate the three structural rules to a fixpoint.

    Per sweep: connections are dropped wherever two angularly adjacent
    neighbours of a corner do not share exactly one further common corner
    (the lower-scored connection of the offending pair loses); then corners
    whose degree leaves {2, 3, 4} are removed outright. Adjacency is kept
    mutual throughout. Repeats until nothing changes.
    """
    g = g.copy()
    while True:
        changed = False
        removals: set[tuple[int, int]] = set()
        for c in g.node_ids():
            nbrs = g.neighbors(c)
            if len(nbrs) < 2:
                continue
            ang = {n: _direction(g, c, n) for n in nbrs}
            ring = sorted(nbrs, key=lambda n: (ang[n], n))
            count = len(ring)
            for idx in range(count if count > 2 else 1):
                n1 = ring[idx]
                n2 = ring[(idx + 1) % count]
                gap = (ang[n2] - ang[n1]) % (2.0 * math.pi)
                if gap > rule3_max_gap:
                    continue
                common = (set(g.neighbors(n1)) & set(g.neighbors(n2))) - {c}
                if len(common) == 1:
                    continue
                s1, s2 = g.adj[c][n1], g.adj[c][n2]
                victim = n1 if (s1, -n1) < (s2, -n2) else n2
                key = (c, victim) if c < victim else (victim, c)
                removals.add(key)
        for a, b in sorted(removals):
            if b in g.adj.get(a, {}):
                g.remove_edge(a, b)
                changed = True
        bad = [c for c in g.node_ids() if g.degree(c) not in (2, 3, 4)]
        for c in bad:
            g.remove_node(c)
            changed = True
        if not changed:
            return g


def components(g: CornerGraph) -> list[list[int]]:
    """Connected components as sorted id lists, ordered by smallest member."""
    seen: set[int] = set()
    out = []
    for start in g.node_ids():
        if start in seen:
            continue
        comp = []
        q = deque([start])
        seen.add(start)
        while q:
            c = q.popleft()
            comp.append(c)
            for n in g.neighbors(c):
                if n not in seen:
                    seen.add(n)
                    q.append(n)
        out.append(sorted(comp))
    return out


def _rot_pos(delta: tuple[int, int]) -> tuple[int, int]:
    return (delta[1], -delta[0])


def _rot_neg(delta: tuple[int, int]) -> tuple[int, int]:
    return (-delta[1], delta[0])


def _classify_step(
    d1: tuple[float, float], delta1: tuple[int, int], v: tuple[float, float]
) -> tuple[int, int] | None:
    """Lattice delta for a physical step ``v``, given the arrival step.

    The arrival ran along ``d1`` and advanced the lattice by ``delta1``.
    Steps nearer parallel keep that delta (sign by direction); steps nearer
    perpendicular rotate it, handedness matching the physical cross
    product. Zero-length steps are unclassifiable.
    """
    norm1 = math.hypot(*d1)
    norm2 = math.hypot(*v)
    if norm1 <= 0.0 or norm2 <= 0.0:
        return None
    dot = (d1[0] * v[0] + d1[1] * v[1]) / (norm1 * norm2)
    crs = (d1[0] * v[1] - d1[1] * v[0]) / (norm1 * norm2)
    if abs(dot) >= abs(crs):
        return delta1 if dot > 0 else (-delta1[0], -delta1[1])
    return _rot_pos(delta1) if crs > 0 else _rot_neg(delta1)


def recover_lattice(g: CornerGraph, comp: list[int]) -> dict[tuple[int, int], int] | None:
    """Integer (row, col) coordinates for a component, or None if inconsistent.

    Walks outward from a degree-2 corner, classifying each new connection
    against the direction it was reached by: near-parallel steps keep the
    lattice delta, near-perpendicular ones rotate it with the matching
    handedness. Conflicting assignments abort.
    """
    nodes = set(comp)
    deg2 = [c for c in comp if g.degree(c) == 2]
    if not deg2:
        return None
    origin = min(deg2)
    pos = {c: (g.corners[c].x, g.corners[c].y) for c in comp}
    coords: dict[int, tuple[int, int]] = {origin: (0, 0)}
    occupied: dict[tuple[int, int], int] = {(0, 0): origin}
    first = g.neighbors(origin)
    n0 = first[0]
    coords[n0] = (0, 1)
    occupied[(0, 1)] = n0
    queue: deque[tuple[int, int]] = deque([(n0, origin)])
    # The first step defines the frame; the origin's other neighbours are
    # classified against it like any later step, which keeps the rotation
    # handedness and the physical geometry consistent.
    d0 = (pos[n0][0] - pos[origin][0], pos[n0][1] - pos[origin][1])
    used0: dict[tuple[int, int], int] = {(0, 1): n0}
    for y in first[1:]:
        v = (pos[y][0] - pos[origin][0], pos[y][1] - pos[origin][1])
        step = _classify_step(d0, (0, 1), v)
        if step is None or step in used0:
            return None
        used0[step] = y
        if step in occupied:
            return None
        coords[y] = step
        occupied[step] = y
        queue.append((y, origin))
    while queue:
        x, parent = queue.popleft()
        px, py = pos[parent]
        xx, xy = pos[x]
        d1 = (xx - px, xy - py)
        delta1 = (coords[x][0] - coords[parent][0], coords[x][1] - coords[parent][1])
        used: dict[tuple[int, int], int] = {}
        for y in g.neighbors(x):
            yx, yy = pos[y]
            step = _classify_step(d1, delta1, (yx - xx, yy - xy))
            if step is None or step in used:
                return None
            used[step] = y
            cell = (coords[x][0] + step[0], coords[x][1] + step[1])
            if y in coords:
                if coords[y] != cell:
                    return None
                continue
            if cell in occupied:
                return None
            coords[y] = cell
            occupied[cell] = y
            queue.append((y, x))
    if set(coords) != nodes:
        return None
    min_r = min(r for r, _ in coords.values())
    min_c = min(c for _, c in coords.values())
    return {(r - min_r, c - min_c): n for n, (r, c) in coords.items()}


@dataclass
class RaggedLattice:
    """A recovered lattice with holes, awaiting trimming."""

    cells: dict[tuple[int, int], CornerTrack]


@dataclass
class GridCorner:
    x: float
    y: float
    first_level: int
    selected_level: int
    contrast: float
    orientation: float

    @classmethod
    def from_track(cls, t: CornerTrack) -> "GridCorner":
        return cls(
            x=t.x,
            y=t.y,
            first_level=t.first_level,
            selected_level=t.selected_level,
            contrast=t.contrast,
            orientation=t.orientation,
        )


@dataclass
class ChessboardGrid:
    """Complete rows x cols lattice of corners in canonical row-major order."""

    rows: int
    cols: int
    corners: list[GridCorner]

    def corner(self, r: int, c: int) -> GridCorner:
        return self.corners[r * self.cols + c]

    def positions(self) -> np.ndarray:
        return np.array([(c.x, c.y) for c in self.corners])

    def to_json_dict(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "corners": [
                {
                    "x": c.x,
                    "y": c.y,
                    "first_level": c.first_level,
                    "selected_level": c.selected_level,
                    "contrast": c.contrast,
                    "orientation": c.orientation,
                }
                for c in self.corners
            ],
        }


def _dims(cells: dict[tuple[int, int], CornerTrack]) -> tuple[int, int]:
    rows = max(r for r, _ in cells) + 1
    cols = max(c for _, c in cells) + 1
    return rows, cols


def _axis_distance(a: float, b: float) -> float:
    return angular_distance_pi(a, b)


def _dark_inside(origin: CornerTrack, diag: CornerTrack) -> bool:
    """Is the board square diagonally inside the origin corner dark?

    The corner's reported orientation encodes which diagonal runs through
    the brighter sectors (orientation + 45 degrees); the inward diagonal
    landing nearer the other axis means a dark square sits inside.
    """
    phi = math.atan2(diag.y - origin.y, diag.x - origin.x)
    light_axis = origin.orientation + math.pi / 4.0
    return _axis_distance(phi, light_axis + math.pi / 2.0) < _axis_distance(phi, light_axis)


def _rotations(rows: int, cols: int):
    """Index maps for the four chirality-preserving grid rotations."""
    yield rows, cols, lambda r, c: (r, c)
    yield cols, rows, lambda r, c: (rows - 1 - c, r)
    yield rows, cols, lambda r, c: (rows - 1 - r, cols - 1 - c)
    yield cols, rows, lambda r, c: (c, cols - 1 - r)


def canonical_grid(cells: dict[tuple[int, int], CornerTrack]) -> ChessboardGrid:
    """Order a complete lattice canonically.

    The traversal must run counter-clockwise on screen, the origin must
    have a dark square diagonally inside it when some rotation offers one,
    and remaining ties fall to the lexicographically smallest corner
    coordinate sequence.
    """
    rows, cols = _dims(cells)
    if rows < 2 or cols < 2 or len(cells) != rows * cols:
        raise ValueError("canonical ordering needs a complete lattice, 2x2 or larger")
    p00 = cells[(0, 0)]
    u = (cells[(0, 1)].x - p00.x, cells[(0, 1)].y - p00.y)
    v = (cells[(1, 0)].x - p00.x, cells[(1, 0)].y - p00.y)
    if u[0] * v[1] - u[1] * v[0] > 0:
        cells = {(c, r): t for (r, c), t in cells.items()}
        rows, cols = cols, rows
    candidates = []
    for nrows, ncols, imap in _rotations(rows, cols):
        ordered = [cells[imap(r, c)] for r in range(nrows) for c in range(ncols)]
        dark = _dark_inside(cells[imap(0, 0)], cells[imap(1, 1)])
        key = tuple((t.x, t.y) for t in ordered)
        candidates.append((dark, key, nrows, ncols, ordered))
    eligible = [c for c in candidates if c[0]] or candidates
    eligible.sort(key=lambda c: c[1])
    _, _, nrows, ncols, ordered = eligible[0]
    return ChessboardGrid(
        rows=nrows, cols=ncols, corners=[GridCorner.from_track(t) for t in ordered]
    )


def to_chessboard(g: CornerGraph, comp: list[int]) -> ChessboardGrid | None:
    """Canonical grid for a component that recovers to a complete lattice."""
    lattice = recover_lattice(g, comp)
    if lattice is None:
        return None
    rows, cols = _dims(lattice)
    if rows < 2 or cols < 2 or len(lattice) != rows * cols:
        return None
    cells = {rc: g.corners[i] for rc, i in lattice.items()}
    return canonical_grid(cells)


def trim_to_complete(
    cells: dict[tuple[int, int], CornerTrack],
) -> dict[tuple[int, int], CornerTrack] | None:
    """Strip incomplete outer rows/cols until the lattice is complete.

    The border missing the most corners goes first (ties in the order top,
    bottom, left, right). Interior holes cannot be healed and return None,
    as does shrinking below 2x2.
    """
    cells = dict(cells)
    while True:
        rows, cols = _dims(cells)
        if rows < 2 or cols < 2:
            return None
        if len(cells) == rows * cols:
            return cells
        missing = {
            "top": sum((0, c) not in cells for c in range(cols)),
            "bottom": sum((rows - 1, c) not in cells for c in range(cols)),
            "left": sum((r, 0) not in cells for r in range(rows)),
            "right": sum((r, cols - 1) not in cells for r in range(rows)),
        }
        side = max(("top", "bottom", "left", "right"), key=lambda s: missing[s])
        if missing[side] == 0:
            return None
        if side == "top":
            cells = {(r - 1, c): t for (r, c), t in cells.items() if r > 0}
        elif side == "bottom":
            cells = {(r, c): t for (r, c), t in cells.items() if r < rows - 1}
        elif side == "left":
            cells = {(r, c - 1): t for (r, c), t in cells.items() if c > 0}
        else:
            cells = {(r, c): t for (r, c), t in cells.items() if c < cols - 1}
        if not cells:
            return None


def _hull_area(points: np.ndarray) -> float:
    if len(points) < 3:
        return 0.0
    try:
        from scipy.spatial import ConvexHull

        return float(ConvexHull(points).volume)
    except Exception:
        return 0.0


def enforce_single_grid(
    items: list[ChessboardGrid | RaggedLattice],
    known_shape: tuple[int, int] | None = None,
    expect_single: bool = False,
) -> list[ChessboardGrid]:
    """Trim ragged candidates, filter by known shape, optionally keep one.

    Ragged lattices are trimmed to complete ones (or dropped). A known
    shape keeps only grids matching it directly or transposed. With
    ``expect_single`` the grid covering the largest convex-hull area wins.
    """
    grids: list[ChessboardGrid] = []
    for item in items:
        if isinstance(item, RaggedLattice):
            cells = trim_to_complete(item.cells)
            if cells is None:
                continue
            grids.append(canonical_grid(cells))
        else:
            grids.append(item)
    if known_shape is not None:
        rs, cs = known_shape
        grids = [g for g in grids if (g.rows, g.cols) in ((rs, cs), (cs, rs))]
    if expect_single and len(grids) > 1:
        areas = [_hull_area(g.positions()) for g in grids]
        best = max(range(len(grids)), key=lambda i: (areas[i], -i))
        grids = [grids[best]]
    return grids
