import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

import helpers
from chessgrid.corners import CornerCandidate
from chessgrid.image import full_to_level, level_to_full
from chessgrid.scales import CornerTrack, associate_levels, select_level


def cand(x, y, level, spoke=1.0):
    return CornerCandidate(
        x=x, y=y, level=level, intensity_raw=1.0,
        intensity_spoke=spoke, orientation=0.0, contrast=1.0,
    )


def at_full(x, y, level, spoke=1.0):
    """Candidate whose full-resolution projection lands at (x, y)."""
    return cand(full_to_level(x, level), full_to_level(y, level), level, spoke)


def test_associate_stacked_levels_single_track():
    per_level = {k: [at_full(40.0, 56.0, k)] for k in range(4)}
    tracks = associate_levels(per_level)
    assert len(tracks) == 1
    assert len(tracks[0].members) == 4
    assert tracks[0].first_level == 0


def test_associate_distant_corners_stay_separate():
    per_level = {0: [at_full(10.0, 10.0, 0), at_full(110.0, 10.0, 0)]}
    tracks = associate_levels(per_level)
    assert len(tracks) == 2


def test_associate_matches_global_assignment_on_separated_clusters():
    # cluster centers are far beyond twice the largest matching radius, so
    # the greedy result must equal the globally nearest assignment
    rng = np.random.default_rng(17)
    centers = np.array([[40.0, 40.0], [160.0, 60.0], [80.0, 170.0], [200.0, 190.0]])
    per_level = {}
    truth = {}
    for level in range(3):
        radius = 1.5 * 2.0**level
        cands = []
        for ci, (cx, cy) in enumerate(centers):
            jit = rng.uniform(-0.4, 0.4, size=2) * radius
            cands.append(at_full(cx + jit[0], cy + jit[1], level))
            truth[(level, len(cands) - 1)] = ci
        per_level[level] = cands
    tracks = associate_levels(per_level)
    assert len(tracks) == len(centers)
    for tr in tracks:
        assert len(tr.members) == 3
        # every member belongs to the same brute-force nearest center
        owners = set()
        for m in tr.members:
            fx, fy = level_to_full(m.x, m.level), level_to_full(m.y, m.level)
            owners.add(int(np.argmin(np.hypot(centers[:, 0] - fx, centers[:, 1] - fy))))
        assert len(owners) == 1


def test_associate_discards_contested_duplicates():
    # two level-1 candidates compete for one head; the farther one is a
    # duplicate observation, not a new corner
    per_level = {
        0: [at_full(50.0, 50.0, 0)],
        1: [at_full(50.2, 50.0, 1), at_full(51.0, 50.0, 1)],
    }
    tracks = associate_levels(per_level)
    assert len(tracks) == 1
    assert [m.level for m in tracks[0].members] == [0, 1]
    assert tracks[0].members[1].x == pytest.approx(full_to_level(50.2, 1))


def test_select_level_prefers_strong_low_level():
    members = [cand(0, 0, 0, spoke=10.0), cand(0, 0, 1, spoke=8.0), cand(0, 0, 2, spoke=9.0)]
    assert select_level(members) == 0


def test_select_level_weighs_down_high_levels():
    members = [cand(0, 0, 0, spoke=2.0), cand(0, 0, 1, spoke=10.0), cand(0, 0, 2, spoke=9.0)]
    assert members[select_level(members)].level == 1


def test_select_level_tie_goes_lower():
    members = [cand(0, 0, 1, spoke=10.0), cand(0, 0, 2, spoke=15.0)]
    # scores 5 and 5: the lower level wins
    assert members[select_level(members)].level == 1


@settings(max_examples=40, deadline=None)
@given(
    alpha=st.floats(0.01, 50.0),
    seed=st.integers(0, 10_000),
)
def test_select_level_scale_invariant(alpha, seed):
    rng = np.random.default_rng(seed)
    levels = sorted(rng.choice(6, size=rng.integers(1, 5), replace=False))
    spokes = rng.uniform(0.1, 20.0, size=len(levels))
    base = [cand(0, 0, int(l), spoke=float(s)) for l, s in zip(levels, spokes)]
    scaled = [cand(0, 0, int(l), spoke=float(alpha * s)) for l, s in zip(levels, spokes)]
    assert select_level(base) == select_level(scaled)


def test_select_level_matches_exhaustive_oracle():
    rng = np.random.default_rng(23)
    for _ in range(200):
        n = rng.integers(1, 6)
        levels = sorted(rng.choice(7, size=n, replace=False))
        spokes = rng.uniform(0.0, 10.0, size=n)
        members = [cand(0, 0, int(l), spoke=float(s)) for l, s in zip(levels, spokes)]
        got = members[select_level(members)].level
        assert got == helpers.eq2_best(spokes, levels)


def test_track_full_resolution_round_trip():
    tr = CornerTrack(members=[cand(4.75, 7.25, 1)], selected_index=0)
    assert tr.x == pytest.approx(level_to_full(4.75, 1))
    assert full_to_level(tr.x, 1) == pytest.approx(4.75)
    assert full_to_level(tr.y, 1) == pytest.approx(7.25)


def test_from_point_round_trip():
    tr = CornerTrack.from_point(33.5, 21.0)
    assert (tr.x, tr.y) == (33.5, 21.0)
    assert tr.first_level == 0 and tr.selected_level == 0
