"""Detector configuration with a flat key = value file format."""

from __future__ import annotations

import math
from dataclasses import dataclass, fields
from pathlib import Path


@dataclass
class DetectorConfig:
    """Every tunable of the detection pipeline, with working defaults."""

    # pyramid
    min_dimension: int = 60
    # corner response and cascade
    ring_radius: float = 3.0
    nms_radius: int = 2
    # Floor just above the rounding dust flat regions leave in the response.
    nms_floor: float = 1e-12
    rel_threshold: float = 0.02
    pos_max: int = 22
    circle_radius: float = 3.0
    # Minimum eigenvalue of the structure tensor as a fraction of its
    # trace. The ratio form keeps the gate unchanged under global gain
    # and offset; an absolute floor would reject dim corners that a
    # brighter exposure of the same scene keeps.
    eig_threshold: float = 0.05
    # refinement and orientation
    meanshift_window: int = 2
    meanshift_iters: int = 10
    meanshift_tol: float = 1e-3
    spoke_length: float = 4.0
    # cross-level association
    match_radius: float = 1.5
    # connectivity
    k_neighbors: int = 8
    perp_tolerance: float = 0.3
    samples_n: int = 7
    skip_scale: float = 2.0
    lateral_fraction: float = 0.1
    lateral_min: float = 1.0
    lateral_max: float = 6.0
    keep_fraction: float = 0.75
    edge_threshold: float = 0.05
    # grid assembly
    vote_geometry_weight: float = 1.0
    vote_min_separation: float = math.pi / 4.0
    rule3_max_gap: float = 3.0 * math.pi / 4.0
    # output filtering
    known_shape: tuple[int, int] | None = None
    expect_single: bool = False

    def to_file(self, path: str | Path) -> None:
        lines = []
        for f in fields(self):
            v = getattr(self, f.name)
            if f.name == "known_shape":
                v = "none" if v is None else f"{v[0]}x{v[1]}"
            elif isinstance(v, bool):
                v = "true" if v else "false"
            elif isinstance(v, float):
                v = repr(v)
            lines.append(f"{f.name} = {v}")
        Path(path).write_text("\n".join(lines) + "\n")

    @classmethod
    def from_file(cls, path: str | Path) -> "DetectorConfig":
        raw: dict[str, str] = {}
        for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected 'key = value', got {line!r}")
            key, _, value = line.partition("=")
            raw[key.strip()] = value.strip()
        return cls.from_mapping(raw)

    @classmethod
    def from_mapping(cls, raw: dict[str, str]) -> "DetectorConfig":
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, value in raw.items():
            if key not in known:
                raise ValueError(f"unknown config key {key!r}")
            kwargs[key] = _parse_value(key, value)
        return cls(**kwargs)


def parse_shape(text: str) -> tuple[int, int] | None:
    text = text.strip().lower()
    if text in ("none", ""):
        return None
    parts = text.split("x")
    if len(parts) != 2:
        raise ValueError(f"expected RxC shape, got {text!r}")
    return (int(parts[0]), int(parts[1]))


_INT_FIELDS = {
    "min_dimension", "nms_radius", "pos_max", "meanshift_window",
    "meanshift_iters", "k_neighbors", "samples_n",
}
_BOOL_FIELDS = {"expect_single"}


def _parse_value(key: str, value: str):
    if key == "known_shape":
        return parse_shape(value)
    if key in _BOOL_FIELDS:
        v = value.strip().lower()
        if v in ("true", "1", "yes"):
            return True
        if v in ("false", "0", "no"):
            return False
        raise ValueError(f"bad boolean for {key}: {value!r}")
    if key in _INT_FIELDS:
        return int(value)
    return float(value)
