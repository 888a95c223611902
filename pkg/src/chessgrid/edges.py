"""Pairwise corner connectivity: neighbour search, gating, edge scoring."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .image import bilinear_sample


@dataclass
class EdgeConfig:
    """Tunables for candidate generation and edge validation."""

    k_neighbors: int = 8
    perp_tolerance: float = 0.3
    samples_n: int = 7
    skip_scale: float = 2.0
    lateral_fraction: float = 0.1
    lateral_min: float = 1.0
    lateral_max: float = 6.0
    keep_fraction: float = 0.75
    edge_threshold: float = 0.05


@dataclass
class EdgeCandidate:
    i: int
    j: int
    length: float
    score: float
    accepted: bool


def knn_candidates(index: int, corners, config) -> list[int]:
    """Indices of the k nearest corners whose scale is at least as coarse.

    Only corners with ``selected_level >= corners[index].selected_level``
    compete; ties in distance break toward the lower index.
    """
    me = corners[index]
    cand = [
        (math.hypot(c.x - me.x, c.y - me.y), i)
        for i, c in enumerate(corners)
        if i != index and c.selected_level >= me.selected_level
    ]
    cand.sort()
    return [i for _, i in cand[: config.k_neighbors]]


def candidate_pairs(corners, config) -> list[tuple[int, int]]:
    """Union of per-corner k-nearest lists as sorted unordered pairs."""
    pairs: set[tuple[int, int]] = set()
    for i in range(len(corners)):
        for j in knn_candidates(i, corners, config):
            pairs.add((i, j) if i < j else (j, i))
    return sorted(pairs)


def angular_distance_pi(a: float, b: float) -> float:
    """Distance between two orientations identified modulo pi."""
    d = abs(a - b) % math.pi
    return min(d, math.pi - d)


def orientation_compatible(a, b, tolerance: float = 0.3) -> bool:
    """True when two corner orientations are perpendicular within tolerance.

    Neighbouring lattice corners have opposite polarity, which flips the
    reported orientation by 90 degrees; parallel orientations indicate
    same-colour (diagonal or doubled) pairs and are rejected.
    """
    return angular_distance_pi(a.orientation, b.orientation) >= math.pi / 2.0 - tolerance


def edge_sample_positions(ci, cj, config) -> tuple[np.ndarray, np.ndarray, float] | None:
    """Longitudinal sample points between two corners, plus the lateral step.

    Points are spread uniformly over the segment after carving out a skip
    zone of ``skip_scale * 2**level`` pixels around each corner. Returns
    (points (n, 2), unit tangent, lateral offset) or None when the skip
    zones swallow the segment or leave less than a pixel of spacing
    between consecutive samples; probes packed tighter than that alias
    into the same bilinear neighbourhood and would count one measurement
    n times. Endpoints are ordered internally by (x, y) so both call
    orders sample identical locations.
    """
    if (ci.x, ci.y) > (cj.x, cj.y):
        ci, cj = cj, ci
    dx = cj.x - ci.x
    dy = cj.y - ci.y
    length = math.hypot(dx, dy)
    if length <= 0.0:
        return None
    n = config.samples_n
    if n < 1:
        raise ValueError("samples_n must be positive")
    lo = config.skip_scale * (2.0**ci.selected_level)
    hi = length - config.skip_scale * (2.0**cj.selected_level)
    if hi <= lo or hi - lo < float(n - 1):
        return None
    if n == 1:
        t = np.array([(lo + hi) * 0.5])
    else:
        t = lo + (hi - lo) * np.arange(n) / (n - 1)
    u = np.array([dx / length, dy / length])
    pts = np.array([ci.x, ci.y])[None, :] + t[:, None] * u[None, :]
    lateral = float(np.clip(config.lateral_fraction * length, config.lateral_min, config.lateral_max))
    return pts, u, lateral


def edge_score(img: np.ndarray, ci, cj, config) -> float:
    """Contrast-normalized evidence that two corners share a lattice edge.

    At each longitudinal sample the two sides of the segment are probed at
    the lateral offset. The across-edge term is the signed side difference
    (sign fixed once per edge by the median vote); the along-edge penalty
    is the mean absolute difference to neighbouring samples on the same
    side. Per-sample terms are sorted and only the best ``keep_fraction``
    kept, which buys tolerance to local occlusions; their sum is divided
    by the combined corner contrast. Symmetric in its two corners by
    construction.
    """
    contrast_sum = ci.contrast + cj.contrast
    if (ci.x, ci.y) > (cj.x, cj.y):
        ci, cj = cj, ci
    geom = edge_sample_positions(ci, cj, config)
    if geom is None:
        return 0.0
    if contrast_sum < 1e-6:
        return 0.0
    pts, u, lateral = geom
    nx, ny = -u[1], u[0]
    a_side = bilinear_sample(img, pts[:, 0] + lateral * nx, pts[:, 1] + lateral * ny)
    b_side = bilinear_sample(img, pts[:, 0] - lateral * nx, pts[:, 1] - lateral * ny)
    diff = a_side - b_side
    sign = 1.0 if np.median(diff) >= 0.0 else -1.0
    e_perp = sign * diff
    da = np.abs(np.diff(a_side))
    db = np.abs(np.diff(b_side))
    if len(da):
        pa = np.concatenate([da[:1], da, da[-1:]])
        pb = np.concatenate([db[:1], db, db[-1:]])
        e_par = 0.5 * (pa[:-1] + pa[1:]) + 0.5 * (pb[:-1] + pb[1:])
    else:
        e_par = np.zeros_like(e_perp)
    terms = e_perp - e_par
    n = len(terms)
    n_keep = max(1, int(math.floor(config.keep_fraction * n + 1e-12)))
    kept = np.sort(terms)[n - n_keep :]
    return float(kept.sum() / contrast_sum)


def validate_connection(img: np.ndarray, ci, cj, i: int, j: int, config) -> EdgeCandidate:
    """Score one candidate pair and compare against the accept threshold."""
    length = math.hypot(cj.x - ci.x, cj.y - ci.y)
    score = edge_score(img, ci, cj, config)
    return EdgeCandidate(i=i, j=j, length=length, score=score, accepted=score >= config.edge_threshold)


def filter_crossing(corners, edges: list[EdgeCandidate], config) -> list[EdgeCandidate]:
    """Drop edges whose probe corridor contains some third corner.

    Lattice neighbours have nothing between them, so a third corner inside
    the sampled corridor (closer to the segment than its lateral offset,
    away from both endpoints) means the connection spans at least two real
    edges and is invalid no matter how well it scored. Only corners of
    comparable scale can veto: a corner seen solely at much coarser levels
    carries several pixels of position slop, and letting it block a
    fine-scale edge severs real lattice links near cluttered borders.
    """
    if not edges:
        return []
    pos = np.array([(c.x, c.y) for c in corners])
    levels = np.array([c.selected_level for c in corners])
    kept = []
    for e in edges:
        p = pos[e.i]
        d = pos[e.j] - p
        length = float(np.hypot(*d))
        if length <= 0.0:
            continue
        u = d / length
        lateral = float(
            np.clip(config.lateral_fraction * length, config.lateral_min, config.lateral_max)
        )
        w = pos - p
        t = w @ u
        lat = np.abs(w[:, 0] * u[1] - w[:, 1] * u[0])
        inside = (t > lateral) & (t < length - lateral) & (lat < lateral)
        inside &= levels <= max(levels[e.i], levels[e.j]) + 1
        inside[e.i] = inside[e.j] = False
        if not inside.any():
            kept.append(e)
    return kept
