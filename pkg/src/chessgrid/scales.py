"""Cross-level candidate association and per-track scale selection."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .corners import CornerCandidate
from .image import full_to_level, level_to_full


@dataclass
class CornerTrack:
    """One physical corner observed at one or more pyramid levels.

    Members are ordered by increasing level and occupy distinct levels.
    Final attributes (position, orientation, contrast, intensity) come from
    the selected member, with its position mapped back to full resolution.
    """

    members: list[CornerCandidate] = field(default_factory=list)
    selected_index: int = 0

    @property
    def first_level(self) -> int:
        return self.members[0].level

    @property
    def selected(self) -> CornerCandidate:
        return self.members[self.selected_index]

    @property
    def selected_level(self) -> int:
        return self.selected.level

    @property
    def x(self) -> float:
        return float(level_to_full(self.selected.x, self.selected.level))

    @property
    def y(self) -> float:
        return float(level_to_full(self.selected.y, self.selected.level))

    @property
    def orientation(self) -> float:
        return self.selected.orientation

    @property
    def contrast(self) -> float:
        return self.selected.contrast

    @property
    def intensity(self) -> float:
        return self.selected.intensity_spoke

    @classmethod
    def from_point(
        cls,
        x: float,
        y: float,
        level: int = 0,
        orientation: float = 0.0,
        contrast: float = 1.0,
        intensity: float = 1.0,
    ) -> "CornerTrack":
        """Single-member track pinned at a full-resolution position."""
        cand = CornerCandidate(
            x=float(full_to_level(x, level)),
            y=float(full_to_level(y, level)),
            level=level,
            intensity_raw=intensity,
            intensity_spoke=intensity,
            orientation=orientation,
            contrast=contrast,
        )
        return cls(members=[cand], selected_index=0)


def select_level(members: list[CornerCandidate]) -> int:
    """Index of the member maximizing spoke intensity / (level + 1).

    Ties go to the lower level, which the ascending member order makes the
    first strict maximum.
    """
    if not members:
        raise ValueError("empty track")
    best = 0
    best_score = members[0].intensity_spoke / (members[0].level + 1)
    for i in range(1, len(members)):
        score = members[i].intensity_spoke / (members[i].level + 1)
        if score > best_score:
            best, best_score = i, score
    return best


def associate_levels(
    per_level: dict[int, list[CornerCandidate]] | list[list[CornerCandidate]],
    match_radius: float = 1.5,
) -> list[CornerTrack]:
    """Greedy bottom-up grouping of per-level candidates into tracks.

    A level-k candidate joins the track whose head projects within
    ``match_radius * 2**k`` full-resolution pixels, nearest first; each
    candidate joins at most one track and a track gains at most one member
    per level. Candidates with no head in range open new tracks; a
    candidate whose every in-range head was claimed by a nearer rival is a
    duplicate observation of an already-tracked corner and is discarded.
    Each returned track already has its scale selected.
    """
    if isinstance(per_level, dict):
        items = sorted(per_level.items())
    else:
        items = list(enumerate(per_level))
    tracks: list[list[CornerCandidate]] = []
    heads = np.empty((0, 2))
    for level, cands in items:
        if not cands:
            continue
        pos = np.array(
            [(level_to_full(c.x, level), level_to_full(c.y, level)) for c in cands]
        )
        taken_c: set[int] = set()
        contested: set[int] = set()
        if len(tracks):
            radius = match_radius * (2.0**level)
            d = np.hypot(
                pos[:, 0, None] - heads[None, :, 0], pos[:, 1, None] - heads[None, :, 1]
            )
            ci, ti = np.nonzero(d <= radius)
            contested = set(int(c) for c in ci)
            order = np.lexsort((ti, ci, d[ci, ti]))
            taken_t: set[int] = set()
            for k in order:
                c, t = int(ci[k]), int(ti[k])
                if c in taken_c or t in taken_t:
                    continue
                if tracks[t][-1].level >= level:
                    continue
                tracks[t].append(cands[c])
                heads[t] = pos[c]
                taken_c.add(c)
                taken_t.add(t)
        new_heads = [heads]
        for c in range(len(cands)):
            if c in taken_c or c in contested:
                continue
            tracks.append([cands[c]])
            new_heads.append(pos[c : c + 1])
        heads = np.concatenate(new_heads, axis=0) if len(new_heads) > 1 else heads
    out = []
    for members in tracks:
        out.append(CornerTrack(members=members, selected_index=select_level(members)))
    return out
