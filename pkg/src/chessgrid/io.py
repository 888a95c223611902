"""Image file round-trips: 8-bit PNG/PGM in, 16-bit PNG tolerated on read."""

from __future__ import annotations

from pathlib import Path

import numpy as np
from PIL import Image

from .image import to_gray_normalized

_SIXTEEN_BIT_MODES = {"I", "I;16", "I;16B", "I;16L", "I;16N"}


def read_gray(path: str | Path) -> np.ndarray:
    """Read a PNG or binary PGM file as normalized float32 grayscale."""
    path = Path(path)
    with Image.open(path) as im:
        mode = im.mode
        if mode == "P":
            im = im.convert("RGB")
            mode = "RGB"
        arr = np.asarray(im)
    depth = 16 if mode in _SIXTEEN_BIT_MODES else 8
    if arr.dtype == np.int32:
        arr = arr.astype(np.uint16)
    return to_gray_normalized(arr, bit_depth=depth)


def _quantize(gray: np.ndarray) -> np.ndarray:
    g = np.clip(np.asarray(gray, dtype=np.float64), 0.0, 1.0)
    return np.rint(g * 255.0).astype(np.uint8)


def write_png(path: str | Path, gray: np.ndarray) -> None:
    """Write grayscale [0, 1] as an 8-bit PNG."""
    Image.fromarray(_quantize(gray), mode="L").save(Path(path), format="PNG")


def write_pgm(path: str | Path, gray: np.ndarray) -> None:
    """Write grayscale [0, 1] as a binary (P5) PGM."""
    q = _quantize(gray)
    h, w = q.shape
    header = f"P5\n{w} {h}\n255\n".encode("ascii")
    Path(path).write_bytes(header + q.tobytes())
