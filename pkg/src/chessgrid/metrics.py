"""Detection scoring: per-image classification, F1, pooled quantiles."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ImageOutcome:
    tp: int
    fp: int
    fn: int
    errors: list[float] = field(default_factory=list)


@dataclass
class Metrics:
    n_images: int
    tp: int
    fp: int
    fn: int
    f1: float
    e50: float | None
    e100: float | None
    r50: float | None
    r100: float | None

    def to_json_dict(self) -> dict:
        return {
            "n_images": self.n_images,
            "tp": self.tp,
            "fp": self.fp,
            "fn": self.fn,
            "f1": self.f1,
            "e50": self.e50,
            "e100": self.e100,
            "r50": self.r50,
            "r100": self.r100,
        }


def f1_score(tp: int, fp: int, fn: int) -> float:
    """2*tp / (2*tp + fp + fn); zero when the denominator is zero."""
    denom = 2 * tp + fp + fn
    return 2.0 * tp / denom if denom else 0.0


def quantiles(values) -> tuple[float, float]:
    """(lower median, maximum) of a non-empty sequence.

    The lower median is the sorted element at index floor((n - 1) / 2), so
    it is always an actual observation.
    """
    vals = sorted(float(v) for v in values)
    if not vals:
        raise ValueError("quantiles of an empty sequence")
    return vals[(len(vals) - 1) // 2], vals[-1]


def _shape_matches(det_shape: tuple[int, int], truth_shape: tuple[int, int]) -> bool:
    return det_shape == truth_shape or det_shape == truth_shape[::-1]


def classify(
    detections,
    truth_shape: tuple[int, int],
    truth_corners: np.ndarray,
    tc: float = 5.0,
    bijective: bool = False,
    truth_offset: tuple[float, float] = (0.0, 0.0),
) -> ImageOutcome:
    """Score one image's detections against its ground truth.

    ``detections`` is a sequence of (rows, cols, corners (n, 2)) tuples.
    Detections whose shape mismatches the truth (transpose accepted) are
    ignored. For each remaining detection, every detected corner's error is
    the distance to its closest ground-truth corner: all errors within
    ``tc`` makes a true positive, any error beyond makes a false positive.
    An image contributing neither counts a single false negative.

    ``bijective`` switches to strict one-to-one greedy matching for
    diagnostics. ``truth_offset`` shifts ground truth produced under the
    alternate pixel-center convention.
    """
    truth = np.asarray(truth_corners, dtype=np.float64).reshape(-1, 2)
    if len(truth) == 0:
        raise ValueError("empty ground truth")
    truth = truth + np.asarray(truth_offset, dtype=np.float64)
    tp = fp = 0
    pooled: list[float] = []
    for rows, cols, corners in detections:
        if not _shape_matches((int(rows), int(cols)), truth_shape):
            continue
        pts = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
        if len(pts) == 0:
            continue
        d = np.hypot(
            pts[:, 0, None] - truth[None, :, 0], pts[:, 1, None] - truth[None, :, 1]
        )
        if bijective:
            errors = _greedy_bijective(d)
        else:
            errors = d.min(axis=1)
        if np.all(errors <= tc):
            tp += 1
            pooled.extend(float(e) for e in errors)
        else:
            fp += 1
    fn = 1 if tp == 0 and fp == 0 else 0
    return ImageOutcome(tp=tp, fp=fp, fn=fn, errors=pooled)


def _greedy_bijective(d: np.ndarray) -> np.ndarray:
    """Distance-sorted one-to-one matching; unmatched rows get infinity."""
    n, m = d.shape
    errors = np.full(n, np.inf)
    order = np.argsort(d, axis=None)
    used_r: set[int] = set()
    used_c: set[int] = set()
    for k in order:
        r, c = divmod(int(k), m)
        if r in used_r or c in used_c:
            continue
        errors[r] = d[r, c]
        used_r.add(r)
        used_c.add(c)
        if len(used_r) == n or len(used_c) == m:
            break
    return errors


def summarize(outcomes, runtimes_ms=None) -> Metrics:
    """Pool per-image outcomes into one Metrics row."""
    outcomes = list(outcomes)
    tp = sum(o.tp for o in outcomes)
    fp = sum(o.fp for o in outcomes)
    fn = sum(o.fn for o in outcomes)
    pooled: list[float] = []
    for o in outcomes:
        pooled.extend(o.errors)
    e50 = e100 = None
    if pooled:
        e50, e100 = quantiles(pooled)
    r50 = r100 = None
    if runtimes_ms:
        r50, r100 = quantiles(runtimes_ms)
    return Metrics(
        n_images=len(outcomes),
        tp=tp,
        fp=fp,
        fn=fn,
        f1=f1_score(tp, fp, fn),
        e50=e50,
        e100=e100,
        r50=r50,
        r100=r100,
    )


CSV_COLUMNS = ["scenario", "N", "FP", "FN", "E50", "E100", "R50", "R100"]


def csv_row(scenario: str, m: Metrics) -> str:
    def fmt(v):
        if v is None:
            return ""
        return f"{v:.4f}" if isinstance(v, float) else str(v)

    return ",".join(
        [scenario, str(m.n_images), str(m.fp), str(m.fn), fmt(m.e50), fmt(m.e100), fmt(m.r50), fmt(m.r100)]
    )
