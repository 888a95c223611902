"""End-to-end chessboard corner detection pipeline."""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .config import DetectorConfig
from .corners import SampleRing, detect_level_candidates
from .edges import (
    candidate_pairs,
    filter_crossing,
    orientation_compatible,
    validate_connection,
)
from .grids import (
    ChessboardGrid,
    RaggedLattice,
    build_graph,
    canonical_grid,
    components,
    enforce_single_grid,
    prune_constraints,
    recover_lattice,
    resolve_votes,
    _dims,
)
from .image import as_gray, build_pyramid, gaussian_blur_3x3
from .scales import CornerTrack, associate_levels


@dataclass
class DetectionResult:
    grids: list[ChessboardGrid]
    corners: list[CornerTrack]
    runtime_ms: float

    def to_json_dict(self) -> dict:
        return {
            "grids": [g.to_json_dict() for g in self.grids],
            "runtime_ms": self.runtime_ms,
        }


def detect(image: np.ndarray, config: DetectorConfig | None = None) -> DetectionResult:
    """Find chessboard corner grids in a grayscale image.

    Runs the per-level corner pass over a dyadic pyramid (top level first,
    whose response maximum anchors the relative intensity filter), merges
    candidates across levels, validates pairwise connections on the
    full-resolution smoothed image, applies the structural grid rules, and
    orders every surviving lattice canonically.
    """
    cfg = config or DetectorConfig()
    t0 = time.perf_counter()
    gray = as_gray(image)
    pyramid = build_pyramid(gray, cfg.min_dimension)
    ring = SampleRing(cfg.ring_radius)
    n_levels = len(pyramid)
    per_level: list[list] = [[] for _ in range(n_levels)]
    blurred0 = None
    top_level_max = 0.0
    for level in range(n_levels - 1, -1, -1):
        blurred = gaussian_blur_3x3(pyramid[level])
        if level == 0:
            blurred0 = blurred
        if level == n_levels - 1:
            # Stage 1 is a no-op on the first pass; the top level gates on
            # its own maximum once that is known.
            cands, filtered = detect_level_candidates(blurred, level, 0.0, cfg, ring)
            top_level_max = float(filtered.max()) if filtered.size else 0.0
            keep = [c for c in cands if c.intensity_raw >= cfg.rel_threshold * top_level_max]
            per_level[level] = keep
        else:
            cands, _ = detect_level_candidates(blurred, level, top_level_max, cfg, ring)
            per_level[level] = cands
    tracks = associate_levels(per_level, cfg.match_radius)
    edges = []
    for i, j in candidate_pairs(tracks, cfg):
        if not orientation_compatible(tracks[i], tracks[j], cfg.perp_tolerance):
            continue
        e = validate_connection(blurred0, tracks[i], tracks[j], i, j, cfg)
        if e.accepted:
            edges.append(e)
    edges = filter_crossing(tracks, edges, cfg)
    graph = build_graph(tracks, edges)
    graph = resolve_votes(graph, cfg.vote_geometry_weight, cfg.vote_min_separation)
    graph = prune_constraints(graph, cfg.rule3_max_gap)
    items: list[ChessboardGrid | RaggedLattice] = []
    for comp in components(graph):
        lattice = recover_lattice(graph, comp)
        if lattice is None:
            continue
        cells = {rc: graph.corners[i] for rc, i in lattice.items()}
        rows, cols = _dims(cells)
        if rows >= 2 and cols >= 2 and len(cells) == rows * cols:
            items.append(canonical_grid(cells))
        else:
            items.append(RaggedLattice(cells=cells))
    grids = enforce_single_grid(items, cfg.known_shape, cfg.expect_single)
    runtime_ms = (time.perf_counter() - t0) * 1000.0
    return DetectionResult(grids=grids, corners=tracks, runtime_ms=runtime_ms)
