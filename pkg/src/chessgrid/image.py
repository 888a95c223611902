"""Grayscale conversion, smoothing kernels, and the dyadic image pyramid."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

DEFAULT_MIN_DIMENSION = 60


def to_gray_normalized(raw: np.ndarray, bit_depth: int = 8) -> np.ndarray:
    """Collapse an integer raster to normalized single-channel float32.

    Parameters
    ----------
    raw : ndarray
        ``(h, w)`` or ``(h, w, c)`` integer array with 1 to 4 channels.
    bit_depth : int
        Source sample depth, 8 or 16. Values are divided by the full-scale
        value ``2**bit_depth - 1``.

    Returns
    -------
    ndarray
        ``(h, w)`` float32 array in [0, 1]. Channels are averaged with equal
        weight before normalization.
    """
    if bit_depth not in (8, 16):
        raise ValueError(f"unsupported bit depth {bit_depth}")
    arr = np.asarray(raw)
    if arr.ndim == 2:
        arr = arr[:, :, None]
    if arr.ndim != 3 or not 1 <= arr.shape[2] <= 4:
        raise ValueError(f"expected 1-4 channels, got shape {arr.shape}")
    if arr.shape[0] == 0 or arr.shape[1] == 0:
        raise ValueError("zero-sized image")
    scale = np.float32((1 << bit_depth) - 1)
    gray = arr.astype(np.float32).mean(axis=2) / scale
    return gray.astype(np.float32, copy=False)


def as_gray(img: np.ndarray) -> np.ndarray:
    """Coerce to the float32 2-D raster every stage of the pipeline expects."""
    arr = np.asarray(img, dtype=np.float32)
    if arr.ndim != 2 or arr.size == 0:
        raise ValueError(f"expected a non-empty 2-D raster, got shape {arr.shape}")
    return arr


def gaussian_blur_3x3(img: np.ndarray) -> np.ndarray:
    """Separable [1, 2, 1]/4 blur along each axis with edge replication."""
    img = np.asarray(img)
    p = np.pad(img, ((1, 1), (0, 0)), mode="edge")
    tmp = (p[:-2] + 2.0 * p[1:-1] + p[2:]) * 0.25
    p = np.pad(tmp, ((0, 0), (1, 1)), mode="edge")
    out = (p[:, :-2] + 2.0 * p[:, 1:-1] + p[:, 2:]) * 0.25
    return out.astype(img.dtype, copy=False)


def box_filter_2x2(img: np.ndarray) -> np.ndarray:
    """Mean over the 2x2 block anchored at each pixel.

    Output keeps the input shape; the last row and column replicate the edge.
    The anchored block means the value at index (i, j) summarizes the square
    whose center sits at (j + 0.5, i + 0.5) in pixel coordinates.
    """
    img = np.asarray(img)
    p = np.pad(img, ((0, 1), (0, 1)), mode="edge")
    out = (p[:-1, :-1] + p[1:, :-1] + p[:-1, 1:] + p[1:, 1:]) * 0.25
    return out.astype(img.dtype, copy=False)


def _halve(img: np.ndarray) -> np.ndarray:
    h, w = img.shape
    c = img[: h - (h % 2), : w - (w % 2)]
    return c.reshape(h // 2, 2, w // 2, 2).mean(axis=(1, 3), dtype=img.dtype)


@dataclass
class Pyramid:
    """Dyadic average pyramid. ``levels[0]`` is the full-resolution image."""

    levels: list[np.ndarray] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.levels)

    def __getitem__(self, k: int) -> np.ndarray:
        return self.levels[k]

    def __iter__(self):
        return iter(self.levels)


def build_pyramid(img: np.ndarray, min_dimension: int = DEFAULT_MIN_DIMENSION) -> Pyramid:
    """Repeated non-overlapping 2x2 averaging with floor halving.

    Levels are appended while the next level would still have
    ``min(width, height) >= min_dimension``. An input already smaller than
    that yields a single-level pyramid.
    """
    if min_dimension < 16:
        raise ValueError(f"min_dimension must be at least 16, got {min_dimension}")
    img = as_gray(img)
    levels = [img]
    while min(levels[-1].shape) // 2 >= min_dimension:
        levels.append(_halve(levels[-1]))
    return Pyramid(levels)


def level_to_full(coord, level: int):
    """Map a level coordinate to full resolution, (x + 0.5) * 2**level - 0.5."""
    return (np.asarray(coord, dtype=np.float64) + 0.5) * float(2**level) - 0.5


def full_to_level(coord, level: int):
    """Inverse of :func:`level_to_full`."""
    return (np.asarray(coord, dtype=np.float64) + 0.5) / float(2**level) - 0.5


def bilinear_sample(img: np.ndarray, x, y):
    """Bilinear sample at (x, y) with coordinates clamped to the image.

    Pixel (i, j) is centered at (x=j, y=i). Accepts arbitrarily shaped
    coordinate arrays and returns float64 samples of matching shape.
    """
    img = np.asarray(img)
    h, w = img.shape
    x = np.clip(np.asarray(x, dtype=np.float64), 0.0, w - 1.0)
    y = np.clip(np.asarray(y, dtype=np.float64), 0.0, h - 1.0)
    x0 = np.clip(np.floor(x).astype(np.int64), 0, max(w - 2, 0))
    y0 = np.clip(np.floor(y).astype(np.int64), 0, max(h - 2, 0))
    fx = x - x0
    fy = y - y0
    x1 = np.minimum(x0 + 1, w - 1)
    y1 = np.minimum(y0 + 1, h - 1)
    v00 = img[y0, x0]
    v01 = img[y0, x1]
    v10 = img[y1, x0]
    v11 = img[y1, x1]
    top = v00 + fx * (v01 - v00)
    bot = v10 + fx * (v11 - v10)
    return top + fy * (bot - top)
