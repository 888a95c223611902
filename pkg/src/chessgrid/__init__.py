"""Blur-robust chessboard corner grid detection with synthetic benchmarks."""

from .config import DetectorConfig, parse_shape
from .detector import DetectionResult, detect
from .grids import ChessboardGrid, GridCorner
from .image import (
    Pyramid,
    bilinear_sample,
    box_filter_2x2,
    build_pyramid,
    full_to_level,
    gaussian_blur_3x3,
    level_to_full,
    to_gray_normalized,
)
from .io import read_gray, write_pgm, write_png
from .metrics import ImageOutcome, Metrics, classify, f1_score, quantiles, summarize
from .render import GroundTruth, SceneSpec, blur_sweep, center_pose, gaussian_blur, render

__version__ = "0.1.0"

__all__ = [
    "ChessboardGrid",
    "DetectionResult",
    "DetectorConfig",
    "GridCorner",
    "GroundTruth",
    "ImageOutcome",
    "Metrics",
    "Pyramid",
    "SceneSpec",
    "bilinear_sample",
    "blur_sweep",
    "box_filter_2x2",
    "build_pyramid",
    "center_pose",
    "classify",
    "detect",
    "f1_score",
    "full_to_level",
    "gaussian_blur",
    "gaussian_blur_3x3",
    "level_to_full",
    "parse_shape",
    "quantiles",
    "read_gray",
    "render",
    "summarize",
    "to_gray_normalized",
    "write_pgm",
    "write_png",
]
