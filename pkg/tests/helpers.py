"""Brute-force oracles used by the test suite.

Everything here is written independently of the package internals: plain
loops, direct formulas, no shared helpers. Slow on purpose; tests feed these
small inputs.
"""

import itertools
import math

import numpy as np

BLUR_KERNEL = np.array(
    [[1.0, 2.0, 1.0], [2.0, 4.0, 2.0], [1.0, 2.0, 1.0]]
) / 16.0


def brute_blur3(img):
    """3x3 [1,2,1] blur by direct convolution over a replicate-padded copy."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            acc = 0.0
            for u in (-1, 0, 1):
                for v in (-1, 0, 1):
                    ii = min(max(i + u, 0), h - 1)
                    jj = min(max(j + v, 0), w - 1)
                    acc += BLUR_KERNEL[u + 1, v + 1] * img[ii, jj]
            out[i, j] = acc
    return out


def brute_box2(img):
    """Anchored 2x2 block mean with bottom/right edge replication."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            i2 = min(i + 1, h - 1)
            j2 = min(j + 1, w - 1)
            out[i, j] = (img[i, j] + img[i, j2] + img[i2, j] + img[i2, j2]) / 4.0
    return out


def clamped_bilinear(img, x, y):
    """Bilinear interpolation at (x, y), coordinates clamped to the raster."""
    img = np.asarray(img, dtype=np.float64)
    h, w = img.shape
    x = min(max(x, 0.0), w - 1.0)
    y = min(max(y, 0.0), h - 1.0)
    x0 = min(int(math.floor(x)), w - 2) if w > 1 else 0
    y0 = min(int(math.floor(y)), h - 2) if h > 1 else 0
    x1 = min(x0 + 1, w - 1)
    y1 = min(y0 + 1, h - 1)
    fx = x - x0
    fy = y - y0
    return (
        img[y0, x0] * (1 - fx) * (1 - fy)
        + img[y0, x1] * fx * (1 - fy)
        + img[y1, x0] * (1 - fx) * fy
        + img[y1, x1] * fx * fy
    )


def ring_points(radius=3.0):
    """Eight circle offsets, 45 degrees apart, axis-aligned four first."""
    d = radius / math.sqrt(2.0)
    return [
        (radius, 0.0), (0.0, radius), (-radius, 0.0), (0.0, -radius),
        (d, d), (-d, d), (-d, -d), (d, -d),
    ]


def saddle_formula(v1, v2, v3, v4):
    mu = (v1 + v2 + v3 + v4) / 4.0
    return (v1 - mu) * (v3 - mu) + (v2 - mu) * (v4 - mu)


def brute_response_at(blurred, x, y, radius=3.0):
    """Ring-sample saddle response at one pixel, float64 throughout."""
    s = [clamped_bilinear(blurred, x + dx, y + dy) for dx, dy in ring_points(radius)]
    return max(
        saddle_formula(s[0], s[1], s[2], s[3]),
        saddle_formula(s[4], s[5], s[6], s[7]),
    )


def brute_response_raster(blurred, radius=3.0):
    blurred = np.asarray(blurred, dtype=np.float64)
    h, w = blurred.shape
    out = np.zeros((h, w))
    for i in range(h):
        for j in range(w):
            out[i, j] = brute_response_at(blurred, float(j), float(i), radius)
    return out


def brute_nms(raster, radius, floor):
    """O(n * r^2) strict-dominance peak scan.

    A cell survives if it exceeds the floor and is strictly greater than
    every other in-bounds cell of its window; ties suppress both cells.
    """
    raster = np.asarray(raster, dtype=np.float64)
    h, w = raster.shape
    peaks = []
    for i in range(h):
        for j in range(w):
            v = raster[i, j]
            if not v > floor:
                continue
            ok = True
            for u in range(-radius, radius + 1):
                for t in range(-radius, radius + 1):
                    if u == 0 and t == 0:
                        continue
                    ii, jj = i + u, j + t
                    if ii < 0 or ii >= h or jj < 0 or jj >= w:
                        continue
                    if not raster[ii, jj] < v:
                        ok = False
                        break
                if not ok:
                    break
            if ok:
                peaks.append((j + 0.5, i + 0.5))
    return peaks


def brute_knn(points, levels, query, k):
    """Indices of the k nearest points at the query's level or above."""
    qx, qy = points[query]
    ranked = []
    for idx, (x, y) in enumerate(points):
        if idx == query or levels[idx] < levels[query]:
            continue
        ranked.append((math.hypot(x - qx, y - qy), idx))
    ranked.sort()
    return [idx for _, idx in ranked[:k]]


def spoke_integral(blurred, x, y, angle, length=4.0, samples=4):
    acc = 0.0
    for s in range(1, samples + 1):
        r = length * s / samples
        acc += clamped_bilinear(blurred, x + r * math.cos(angle), y + r * math.sin(angle))
    return acc / samples


def dense_orientation(blurred, x, y, length=4.0, steps=3600):
    """Edge orientation via dense search over spoke-pair brightness.

    Scans the half circle for the diagonal maximizing (brightness of the
    opposite-spoke pair at angle a) minus (the pair 90 degrees away); the
    edge direction sits 45 degrees off that diagonal. Returned in
    [-pi/2, pi/2).
    """

    def sp(a):
        return spoke_integral(blurred, x, y, a, length)

    best_a, best_v = 0.0, -math.inf
    for i in range(steps):
        a = math.pi * i / steps
        v = (sp(a) + sp(a + math.pi)) - (sp(a + math.pi / 2) + sp(a + 3 * math.pi / 2))
        if v > best_v:
            best_a, best_v = a, v
    ori = best_a - math.pi / 4.0
    while ori < -math.pi / 2.0:
        ori += math.pi
    while ori >= math.pi / 2.0:
        ori -= math.pi
    return ori


def angdiff_pi(a, b):
    """Angular distance under pi-periodicity."""
    d = (a - b) % math.pi
    return min(d, math.pi - d)


def eq2_best(intensities, levels):
    """Exhaustive argmax of intensity / (level + 1), ties to the lower level."""
    best = None
    for inten, lev in zip(intensities, levels):
        score = inten / (lev + 1.0)
        if best is None or score > best[0] or (score == best[0] and lev < best[1]):
            best = (score, lev)
    return best[1]


def lower_median(values):
    s = sorted(values)
    return s[(len(s) - 1) // 2]


def grid_adjacency(rows, cols):
    """Rook adjacency of an r x c lattice, nodes numbered row-major."""
    adj = {r * cols + c: set() for r in range(rows) for c in range(cols)}
    for r in range(rows):
        for c in range(cols):
            for dr, dc in ((1, 0), (-1, 0), (0, 1), (0, -1)):
                rr, cc = r + dr, c + dc
                if 0 <= rr < rows and 0 <= cc < cols:
                    adj[r * cols + c].add(rr * cols + cc)
    return adj


def verify_chessboard_rules(rows, cols, corners, quadrant_gap=3.0 * math.pi / 4.0):
    """Check a reported grid against the three connection rules.

    Rules, applied to the lattice adjacency implied by the row-major corner
    layout with the reported in-image positions:
      1. every connection is mutual;
      2. every node has 2, 3, or 4 neighbours;
      3. at each node, cyclically adjacent connection pairs that span a
         quadrant (angular gap at most ``quadrant_gap``) share exactly one
         common corner besides the node itself.
    Returns a list of violation strings, empty when the grid is valid.
    """
    pts = np.asarray(corners, dtype=np.float64).reshape(rows * cols, 2)
    adj = grid_adjacency(rows, cols)
    bad = []
    for n, nbrs in adj.items():
        for m in nbrs:
            if n not in adj[m]:
                bad.append("connection %d-%d not mutual" % (n, m))
        if len(nbrs) not in (2, 3, 4):
            bad.append("node %d has degree %d" % (n, len(nbrs)))
        ordered = sorted(
            nbrs,
            key=lambda m: math.atan2(pts[m, 1] - pts[n, 1], pts[m, 0] - pts[n, 0]),
        )
        k = len(ordered)
        for i in range(k):
            a, b = ordered[i], ordered[(i + 1) % k]
            if k == 2 and i == 1:
                break
            ang_a = math.atan2(pts[a, 1] - pts[n, 1], pts[a, 0] - pts[n, 0])
            ang_b = math.atan2(pts[b, 1] - pts[n, 1], pts[b, 0] - pts[n, 0])
            gap = (ang_b - ang_a) % (2.0 * math.pi)
            if gap > quadrant_gap:
                continue
            common = (adj[a] & adj[b]) - {n}
            if len(common) != 1:
                bad.append(
                    "node %d pair (%d,%d) shares %d corners" % (n, a, b, len(common))
                )
    return bad


def all_trim_orders(present):
    """Fixpoints of deleting incomplete border rows/cols in every order.

    ``present`` is a boolean mask of which lattice corners exist. Returns the
    set of distinct end states as (top, bottom, left, right) index bounds,
    exploring all removal sequences.
    """
    present = np.asarray(present, dtype=bool)

    def complete(lo_r, hi_r, lo_c, hi_c):
        results = set()
        sub = present[lo_r:hi_r, lo_c:hi_c]
        if sub.size == 0 or sub.all():
            return {(lo_r, hi_r, lo_c, hi_c)}
        moves = []
        if not sub[0].all():
            moves.append((lo_r + 1, hi_r, lo_c, hi_c))
        if not sub[-1].all():
            moves.append((lo_r, hi_r - 1, lo_c, hi_c))
        if not sub[:, 0].all():
            moves.append((lo_r, hi_r, lo_c + 1, hi_c))
        if not sub[:, -1].all():
            moves.append((lo_r, hi_r, lo_c, hi_c - 1))
        for mv in moves:
            results |= complete(*mv)
        return results

    return complete(0, present.shape[0], 0, present.shape[1])


def coverage_axis_aligned(x0, y0, sq, n_rows, n_cols, px, py, fg, bg):
    """Analytic pixel value for an axis-aligned board, no blur or noise.

    Pixel (px, py) covers [px-0.5, px+0.5] x [py-0.5, py+0.5]. Dark squares
    are those with even (row+col). Returns area-weighted fg/bg mix, treating
    everything outside the board as background.
    """

    def dark_fraction(ax0, ax1, ay0, ay1):
        total = 0.0
        for r in range(n_rows):
            for c in range(n_cols):
                if (r + c) % 2 != 0:
                    continue
                sx0, sx1 = x0 + c * sq, x0 + (c + 1) * sq
                sy0, sy1 = y0 + r * sq, y0 + (r + 1) * sq
                ox = max(0.0, min(ax1, sx1) - max(ax0, sx0))
                oy = max(0.0, min(ay1, sy1) - max(ay0, sy0))
                total += ox * oy
        return total

    dark = dark_fraction(px - 0.5, px + 0.5, py - 0.5, py + 0.5)
    return fg * dark + bg * (1.0 - dark)


def hungarian_cost(costs):
    """Minimum total cost of a perfect assignment, by exhaustion."""
    n = len(costs)
    best = math.inf
    for perm in itertools.permutations(range(n)):
        best = min(best, sum(costs[i][perm[i]] for i in range(n)))
    return best
