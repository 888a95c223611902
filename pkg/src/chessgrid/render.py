"""Synthetic chessboard rendering with exact projective ground truth."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage


@dataclass
class SceneSpec:
    """Everything needed to render one board image deterministically.

    The board plane puts square (row i, col j) on
    [j*s, (j+1)*s] x [i*s, (i+1)*s] with s = square_size; ``homography``
    maps board coordinates to image pixel-center coordinates. Squares with
    even (i + j) take the ``fg`` intensity, odd ones ``bg``, and everything
    off the board renders as ``bg``.
    """

    squares_rows: int
    squares_cols: int
    square_size: float
    image_width: int
    image_height: int
    homography: np.ndarray
    fg: float = 0.1
    bg: float = 0.9
    blur_sigma: float = 0.0
    noise_sigma: float = 0.0
    supersample: int = 4
    seed: int = 0

    def __post_init__(self):
        self.homography = np.asarray(self.homography, dtype=np.float64).reshape(3, 3)
        if self.squares_rows < 2 or self.squares_cols < 2:
            raise ValueError("need at least 2x2 squares")
        if self.supersample < 1:
            raise ValueError("supersample must be positive")

    @property
    def corner_shape(self) -> tuple[int, int]:
        return (self.squares_rows - 1, self.squares_cols - 1)


@dataclass
class GroundTruth:
    """Inner corner positions, row-major over the (rows, cols) corner grid."""

    shape: tuple[int, int]
    corners: np.ndarray

    def to_json_dict(self) -> dict:
        return {
            "shape": [int(self.shape[0]), int(self.shape[1])],
            "corners": [[float(x), float(y)] for x, y in self.corners],
        }

    @classmethod
    def from_json_dict(cls, d: dict) -> "GroundTruth":
        return cls(shape=(int(d["shape"][0]), int(d["shape"][1])), corners=np.array(d["corners"], dtype=np.float64).reshape(-1, 2))


def apply_homography(h: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64).reshape(-1, 2)
    w = h[2, 0] * pts[:, 0] + h[2, 1] * pts[:, 1] + h[2, 2]
    x = (h[0, 0] * pts[:, 0] + h[0, 1] * pts[:, 1] + h[0, 2]) / w
    y = (h[1, 0] * pts[:, 0] + h[1, 1] * pts[:, 1] + h[1, 2]) / w
    return np.stack([x, y], axis=1)


def ground_truth(spec: SceneSpec) -> GroundTruth:
    rows, cols = spec.corner_shape
    board = np.array(
        [((j + 1) * spec.square_size, (i + 1) * spec.square_size) for i in range(rows) for j in range(cols)]
    )
    return GroundTruth(shape=(rows, cols), corners=apply_homography(spec.homography, board))


def _check_visible(spec: SceneSpec) -> None:
    w_board = spec.squares_cols * spec.square_size
    h_board = spec.squares_rows * spec.square_size
    outline = np.array([(0.0, 0.0), (w_board, 0.0), (w_board, h_board), (0.0, h_board)])
    denom = spec.homography[2, 0] * outline[:, 0] + spec.homography[2, 1] * outline[:, 1] + spec.homography[2, 2]
    if np.any(denom <= 0):
        raise ValueError("homography folds the board behind the image plane")
    proj = apply_homography(spec.homography, outline)
    if (
        proj[:, 0].min() < 0.0
        or proj[:, 1].min() < 0.0
        or proj[:, 0].max() > spec.image_width - 1.0
        or proj[:, 1].max() > spec.image_height - 1.0
    ):
        raise ValueError("board projects partially outside the image")


def gaussian_blur(img: np.ndarray, sigma: float) -> np.ndarray:
    """Separable Gaussian with kernel radius ceil(3*sigma), edge replicated."""
    if sigma <= 0.0:
        return img
    radius = int(math.ceil(3.0 * sigma))
    k = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma) ** 2)
    k = (k / k.sum()).astype(np.float64)
    out = ndimage.convolve1d(img.astype(np.float64), k, axis=0, mode="nearest")
    out = ndimage.convolve1d(out, k, axis=1, mode="nearest")
    return out.astype(img.dtype, copy=False)


def render(spec: SceneSpec) -> tuple[np.ndarray, GroundTruth]:
    """Render a scene; returns (float32 image in [0, 1], ground truth).

    The binary board pattern is evaluated on a ``supersample`` times finer
    grid through the inverse homography, box-averaged down, blurred, and
    then corrupted with seeded i.i.d. Gaussian noise. Bit-identical for
    identical specs.
    """
    _check_visible(spec)
    hinv = np.linalg.inv(spec.homography)
    s = spec.supersample
    w, h = spec.image_width, spec.image_height
    sq = spec.square_size
    w_board = spec.squares_cols * sq
    h_board = spec.squares_rows * sq
    img = np.empty((h, w), dtype=np.float32)
    xs = (np.arange(w * s, dtype=np.float64) + 0.5) / s - 0.5
    # Render in row bands to bound the supersampled temporaries.
    band = max(1, int(4_000_000 // max(1, w * s * s)))
    for y0 in range(0, h, band):
        y1 = min(h, y0 + band)
        ys = (np.arange(y0 * s, y1 * s, dtype=np.float64) + 0.5) / s - 0.5
        gx, gy = np.meshgrid(xs, ys)
        denom = hinv[2, 0] * gx + hinv[2, 1] * gy + hinv[2, 2]
        bx = (hinv[0, 0] * gx + hinv[0, 1] * gy + hinv[0, 2]) / denom
        by = (hinv[1, 0] * gx + hinv[1, 1] * gy + hinv[1, 2]) / denom
        inside = (bx >= 0.0) & (bx <= w_board) & (by >= 0.0) & (by <= h_board)
        ci = np.floor(bx / sq).astype(np.int64)
        ri = np.floor(by / sq).astype(np.int64)
        dark = ((ri + ci) % 2) == 0
        vals = np.where(inside & dark, spec.fg, spec.bg)
        img[y0:y1] = vals.reshape(y1 - y0, s, w, s).mean(axis=(1, 3))
    img = gaussian_blur(img, spec.blur_sigma)
    if spec.noise_sigma > 0.0:
        rng = np.random.default_rng(spec.seed)
        img = img + rng.normal(0.0, spec.noise_sigma, img.shape)
    img = np.clip(img, 0.0, 1.0).astype(np.float32)
    return img, ground_truth(spec)


def blur_sweep(spec: SceneSpec, sigmas) -> list[tuple[float, np.ndarray, GroundTruth]]:
    """One render per sigma with geometry, seed, and noise shared."""
    out = []
    for sigma in sigmas:
        s = SceneSpec(
            squares_rows=spec.squares_rows,
            squares_cols=spec.squares_cols,
            square_size=spec.square_size,
            image_width=spec.image_width,
            image_height=spec.image_height,
            homography=spec.homography,
            fg=spec.fg,
            bg=spec.bg,
            blur_sigma=float(sigma),
            noise_sigma=spec.noise_sigma,
            supersample=spec.supersample,
            seed=spec.seed,
        )
        img, gt = render(s)
        out.append((float(sigma), img, gt))
    return out


def center_pose(
    image_size: tuple[int, int],
    squares: tuple[int, int],
    square_size: float,
    angle_deg: float = 0.0,
    scale: float = 1.0,
    tilt: tuple[float, float] = (0.0, 0.0),
) -> np.ndarray:
    """Homography placing the board center at the image center.

    Rotation and the projective tilt act about the board center, so mild
    tilts keep the board on screen.
    """
    w, h = image_size
    rows, cols = squares
    bcx = cols * square_size / 2.0
    bcy = rows * square_size / 2.0
    a = math.radians(angle_deg)
    ca, sa = math.cos(a), math.sin(a)
    center = np.array([[1.0, 0.0, -bcx], [0.0, 1.0, -bcy], [0.0, 0.0, 1.0]])
    rot = np.array([[scale * ca, -scale * sa, 0.0], [scale * sa, scale * ca, 0.0], [tilt[0], tilt[1], 1.0]])
    shift = np.array([[1.0, 0.0, (w - 1) / 2.0], [0.0, 1.0, (h - 1) / 2.0], [0.0, 0.0, 1.0]])
    return shift @ rot @ center
