"""Saddle-corner response, peak extraction, rejection cascade, refinement.

Pixel coordinates put the center of raster cell (row i, col j) at
(x=j, y=i). The 2x2 box filter shifts its anchored output by half a pixel,
so peaks pulled from the filtered raster carry a (+0.5, +0.5) offset back
into image coordinates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .image import bilinear_sample

TWO_PI = 2.0 * math.pi
SPOKE_COUNT = 32
SPOKE_BINS = 16
CIRCLE_SAMPLES = 16


def xscore(v1, v2, v3, v4):
    """Saddle response of four ring samples taken 90 degrees apart.

    Opposite samples multiply: with mu the mean of all four, the score is
    (v1 - mu) * (v3 - mu) + (v2 - mu) * (v4 - mu). Alternating dark/light
    quadrants push it positive, edges and flats push it to zero or below.
    Affine lighting a*v + b rescales the score by a**2.
    """
    v1 = np.asarray(v1)
    mu = (v1 + v2 + v3 + v4) * 0.25
    return (v1 - mu) * (v3 - mu) + (v2 - mu) * (v4 - mu)


@dataclass(frozen=True)
class SampleRing:
    """Eight samples on a circle, 45 degrees apart, starting on the +x axis."""

    radius: float = 3.0

    def offsets(self) -> np.ndarray:
        r = float(self.radius)
        d = r / math.sqrt(2.0)
        # Axis-aligned quadruple first, then the diagonal one.
        return np.array(
            [
                (r, 0.0), (0.0, r), (-r, 0.0), (0.0, -r),
                (d, d), (-d, d), (-d, -d), (d, -d),
            ]
        )


def _shifted(
    padded: np.ndarray,
    pad: int,
    dx: float,
    dy: float,
    shape,
    tmp: np.ndarray | None = None,
) -> np.ndarray:
    """Image translated by (-dx, -dy) via views into an edge-padded copy.

    ``tmp``, when given, is clobbered as scratch for the bilinear blend; it
    lets a caller looping over several fractional offsets reuse one buffer.
    """
    h, w = shape
    dx, dy = float(dx), float(dy)
    fx, fy = math.floor(dx), math.floor(dy)
    # Python-float weights keep the blend in the image dtype instead of
    # promoting everything to float64.
    ax, ay = dx - fx, dy - fy

    def view(ix: int, iy: int) -> np.ndarray:
        return padded[pad + iy : pad + iy + h, pad + ix : pad + ix + w]

    if ax == 0.0 and ay == 0.0:
        return view(fx, fy)
    w00 = (1.0 - ax) * (1.0 - ay)
    w01 = ax * (1.0 - ay)
    w10 = (1.0 - ax) * ay
    w11 = ax * ay
    out = np.multiply(view(fx, fy), w00)
    if tmp is None:
        tmp = np.empty_like(out)
    if w01:
        np.multiply(view(fx + 1, fy), w01, out=tmp)
        out += tmp
    if w10:
        np.multiply(view(fx, fy + 1), w10, out=tmp)
        out += tmp
    if w11:
        np.multiply(view(fx + 1, fy + 1), w11, out=tmp)
        out += tmp
    return out


def _saddle_pairs(v1, v2, v3, v4) -> np.ndarray:
    """xscore over full rasters with scratch reuse instead of fresh temps.

    Same operation order as ``xscore``, so results match it bit for bit;
    only the temporary allocations differ, which matters at several
    megapixels per call.
    """
    mu = v1 + v2
    mu += v3
    mu += v4
    mu *= 0.25
    d1 = v1 - mu
    d3 = v3 - mu
    d1 *= d3
    np.subtract(v2, mu, out=d3)
    np.subtract(v4, mu, out=mu)
    d3 *= mu
    d1 += d3
    return d1


def corner_intensity(blurred: np.ndarray, ring: SampleRing | None = None) -> np.ndarray:
    """Saddle response raster: max of the two interleaved ring quadruples.

    Evaluated densely at every pixel of the (already smoothed) image with
    edge replication past the borders. Constant patches give exactly zero,
    straight edges give non-positive values, saddle corners positive ones.
    """
    ring = ring or SampleRing()
    blurred = np.asarray(blurred)
    pad = int(math.ceil(ring.radius)) + 1
    padded = np.pad(blurred, pad, mode="edge")
    offs = ring.offsets()
    scratch = np.empty_like(blurred)
    s = [_shifted(padded, pad, dx, dy, blurred.shape, tmp=scratch) for dx, dy in offs]
    axis_score = _saddle_pairs(s[0], s[1], s[2], s[3])
    diag_score = _saddle_pairs(s[4], s[5], s[6], s[7])
    np.maximum(axis_score, diag_score, out=axis_score)
    return axis_score.astype(blurred.dtype, copy=False)


RESPONSE_EPS = 1e-12


def nonmax_suppress(
    intensity: np.ndarray, radius: int = 2, floor: float = RESPONSE_EPS
) -> np.ndarray:
    """Local maxima of a raster as (x + 0.5, y + 0.5) centers, row-major.

    A pixel wins if it is strictly greater than every neighbour within
    ``radius`` (Chebyshev) and above ``floor``; exact plateaus suppress all
    their members. The default floor sits just above the float rounding
    dust that flat image regions leave in the saddle response.
    """
    if radius < 1:
        raise ValueError("radius must be at least 1")
    img = np.asarray(intensity)
    size = 2 * radius + 1
    win_max = ndimage.maximum_filter(img, size=size, mode="constant", cval=-np.inf)
    cand = (img == win_max) & (img > floor)
    ys, xs = np.nonzero(cand)
    if len(ys) == 0:
        return np.empty((0, 2))
    padded = np.pad(img, radius, mode="constant", constant_values=-np.inf)
    off = np.arange(size)
    dy, dx = np.meshgrid(off - radius, off - radius, indexing="ij")
    others = (dy != 0) | (dx != 0)
    keep = []
    for lo in range(0, len(ys), 65536):
        cy = ys[lo : lo + 65536]
        cx = xs[lo : lo + 65536]
        wins = padded[cy[:, None, None] + off[None, :, None], cx[:, None, None] + off[None, None, :]]
        vals = img[cy, cx]
        keep.append(np.all(wins[:, others] < vals[:, None], axis=1))
    ok = np.concatenate(keep)
    xs, ys = xs[ok], ys[ok]
    return np.stack([xs + 0.5, ys + 0.5], axis=1)


def _window(img: np.ndarray, cy: np.ndarray, cx: np.ndarray, half: int):
    """Clipped (replicating) square windows around integer centers.

    Returns (values, iy, ix, inside) where values has shape (n, k, k).
    """
    h, w = img.shape
    off = np.arange(-half, half + 1)
    iy = cy[:, None] + off[None, :]
    ix = cx[:, None] + off[None, :]
    inside = (iy[:, :, None] >= 0) & (iy[:, :, None] < h) & (ix[:, None, :] >= 0) & (ix[:, None, :] < w)
    iyc = np.clip(iy, 0, h - 1)
    ixc = np.clip(ix, 0, w - 1)
    vals = img[iyc[:, :, None], ixc[:, None, :]]
    return vals, iyc, ixc, inside


def filter_cascade(
    peaks: np.ndarray,
    filtered: np.ndarray,
    blurred: np.ndarray,
    top_level_max: float,
    config,
) -> tuple[np.ndarray, np.ndarray]:
    """Four-stage rejection cascade over candidate peaks.

    Stages, cheapest first:
      1. peak value at least ``rel_threshold`` times the top-pyramid-level max;
      2. at most ``pos_max`` positive cells in the peak's 5x5 neighbourhood;
      3. a 16-sample circle of the smoothed gray, thresholded at its own mean,
         shows exactly 4 sign transitions;
      4. minimum eigenvalue of the 2x2 structure tensor over a 5x5 gradient
         window reaches ``eig_threshold`` as a fraction of the tensor trace
         (gain- and offset-free, so lighting cannot flip the verdict).

    Returns (keep_mask, fail_stage); fail_stage holds the first failed stage
    per peak, 0 for survivors.
    """
    peaks = np.asarray(peaks, dtype=np.float64).reshape(-1, 2)
    n = len(peaks)
    keep = np.ones(n, dtype=bool)
    fail = np.zeros(n, dtype=np.int8)
    if n == 0:
        return keep, fail
    ax = (peaks[:, 0] - 0.5).round().astype(np.int64)
    ay = (peaks[:, 1] - 0.5).round().astype(np.int64)

    vals = filtered[ay, ax]
    bad = vals < config.rel_threshold * top_level_max
    fail[bad] = 1
    keep &= ~bad

    idx = np.nonzero(keep)[0]
    if len(idx):
        wins, _, _, inside = _window(filtered, ay[idx], ax[idx], 2)
        pos = ((wins > RESPONSE_EPS) & inside).sum(axis=(1, 2))
        bad = pos > config.pos_max
        fail[idx[bad]] = 2
        keep[idx[bad]] = False

    idx = np.nonzero(keep)[0]
    if len(idx):
        ang = np.arange(CIRCLE_SAMPLES) * (TWO_PI / CIRCLE_SAMPLES)
        cx = peaks[idx, 0, None] + config.circle_radius * np.cos(ang)[None, :]
        cy = peaks[idx, 1, None] + config.circle_radius * np.sin(ang)[None, :]
        ring = bilinear_sample(blurred, cx, cy)
        bits = ring > ring.mean(axis=1, keepdims=True)
        trans = (bits != np.roll(bits, 1, axis=1)).sum(axis=1)
        bad = trans != 4
        fail[idx[bad]] = 3
        keep[idx[bad]] = False

    idx = np.nonzero(keep)[0]
    if len(idx):
        # Central-difference gradients with edge replication, gathered only
        # inside the 5x5 candidate windows instead of over the whole raster.
        h, w = blurred.shape
        off = np.arange(-2, 3)
        rr = np.clip(ay[idx][:, None, None] + off[None, :, None], 0, h - 1)
        cc = np.clip(ax[idx][:, None, None] + off[None, None, :], 0, w - 1)
        gxw = blurred[rr, np.minimum(cc + 1, w - 1)].astype(np.float64)
        gxw -= blurred[rr, np.maximum(cc - 1, 0)]
        gxw *= 0.5
        gyw = blurred[np.minimum(rr + 1, h - 1), cc].astype(np.float64)
        gyw -= blurred[np.maximum(rr - 1, 0), cc]
        gyw *= 0.5
        a = (gxw * gxw).mean(axis=(1, 2))
        c = (gyw * gyw).mean(axis=(1, 2))
        b = (gxw * gyw).mean(axis=(1, 2))
        lam = 0.5 * (a + c) - np.sqrt(0.25 * (a - c) ** 2 + b * b)
        bad = (lam <= 0.0) | (lam < config.eig_threshold * (a + c))
        fail[idx[bad]] = 4
        keep[idx[bad]] = False

    return keep, fail


def meanshift_refine(
    raster: np.ndarray,
    peaks: np.ndarray,
    window: int = 2,
    max_iter: int = 10,
    tol: float = 1e-3,
    grid_offset: float = 0.0,
) -> np.ndarray:
    """Sub-pixel refinement by iterated weighted centroid.

    Weights are max(raster, 0) over the (2*window+1)^2 cells nearest the
    current estimate. Iteration stops when the step drops below ``tol`` or
    after ``max_iter`` rounds; positions never leave the spatial extent of
    the window around the seed (seed +/- (window + 0.5)). A window with no
    positive weight leaves the estimate untouched.

    ``grid_offset`` places raster cell (i, j) at coordinate
    (j + grid_offset, i + grid_offset), which lets the caller feed box
    anchored rasters with their half-pixel shift.
    """
    raster = np.asarray(raster, dtype=np.float64)
    h, w = raster.shape
    peaks = np.asarray(peaks, dtype=np.float64).reshape(-1, 2)
    pos = peaks - grid_offset
    seed = pos.copy()
    active = np.ones(len(pos), dtype=bool)
    for _ in range(max_iter):
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        cx = pos[idx, 0].round().astype(np.int64)
        cy = pos[idx, 1].round().astype(np.int64)
        wts, iy, ix, _ = _window(raster, cy, cx, window)
        wts = np.maximum(wts, 0.0)
        tot = wts.sum(axis=(1, 2))
        live = tot > 0.0
        if not live.any():
            break
        sub = idx[live]
        tot = tot[live]
        nx = (wts[live] * ix[live, None, :]).sum(axis=(1, 2)) / tot
        ny = (wts[live] * iy[live, :, None]).sum(axis=(1, 2)) / tot
        lim = window + 0.5
        nx = np.clip(nx, seed[sub, 0] - lim, seed[sub, 0] + lim)
        ny = np.clip(ny, seed[sub, 1] - lim, seed[sub, 1] + lim)
        step = np.hypot(nx - pos[sub, 0], ny - pos[sub, 1])
        pos[sub, 0] = nx
        pos[sub, 1] = ny
        nxt = np.zeros_like(active)
        nxt[sub] = step >= tol
        active = nxt
    return pos + grid_offset


def _spoke_kernel(sigma: float = 1.0, radius: int = 3) -> np.ndarray:
    k = np.exp(-0.5 * (np.arange(-radius, radius + 1) / sigma) ** 2)
    return k / k.sum()


_SMOOTH = _spoke_kernel()


def spoke_orientation(
    blurred: np.ndarray, points: np.ndarray, spoke_length: float = 4.0
) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Half-circle orientation, peak strength, and sector contrast per point.

    32 radial line integrals (4 bilinear samples each, out to
    ``spoke_length`` pixels) are differenced against the spoke 90 degrees
    away; the signed differences fold into 16 half-circle bins which are
    smoothed circularly with a 1-bin Gaussian. The peak bin, refined by a
    three-point quadratic fit, gives the diagonal through the brighter
    sector pair; orientation is that diagonal turned back by 45 degrees and
    wrapped into [-pi/2, pi/2). Contrast is the mean integral difference
    between the bright and dark sector pair at the winning bin.

    Returns (orientation, peak_score, contrast) arrays aligned with points.
    """
    points = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    n = len(points)
    if n == 0:
        z = np.empty(0)
        return z, z.copy(), z.copy()
    ang = np.arange(SPOKE_COUNT) * (TWO_PI / SPOKE_COUNT)
    radii = spoke_length * (np.arange(4) + 1.0) / 4.0
    dx = np.cos(ang)[:, None] * radii[None, :]
    dy = np.sin(ang)[:, None] * radii[None, :]
    sx = points[:, 0, None, None] + dx[None]
    sy = points[:, 1, None, None] + dy[None]
    vals = bilinear_sample(blurred, sx, sy)
    s = vals.mean(axis=2)
    d = s - np.roll(s, -8, axis=1)
    half = d[:, :SPOKE_BINS] + d[:, SPOKE_BINS:]
    sm = ndimage.convolve1d(half, _SMOOTH, axis=1, mode="wrap")
    j = sm.argmax(axis=1)
    rows = np.arange(n)
    y0 = sm[rows, j]
    ym = sm[rows, (j - 1) % SPOKE_BINS]
    yp = sm[rows, (j + 1) % SPOKE_BINS]
    den = ym - 2.0 * y0 + yp
    with np.errstate(divide="ignore", invalid="ignore"):
        delta = np.where(den != 0.0, 0.5 * (ym - yp) / den, 0.0)
    delta = np.clip(delta, -0.5, 0.5)
    diag = (j + delta) * (math.pi / SPOKE_BINS)
    orientation = (diag - math.pi / 4.0 + math.pi / 2.0) % math.pi - math.pi / 2.0
    bright = s[rows, j] + s[rows, (j + 16) % SPOKE_COUNT]
    dark = s[rows, (j + 8) % SPOKE_COUNT] + s[rows, (j + 24) % SPOKE_COUNT]
    contrast = np.maximum(0.0, (bright - dark) * 0.5)
    return orientation, y0, contrast


@dataclass
class CornerCandidate:
    """A surviving peak at one pyramid level, in that level's coordinates."""

    x: float
    y: float
    level: int
    intensity_raw: float
    intensity_spoke: float
    orientation: float
    contrast: float


def detect_level_candidates(
    blurred: np.ndarray,
    level: int,
    top_level_max: float,
    config,
    ring: SampleRing | None = None,
) -> tuple[list[CornerCandidate], np.ndarray]:
    """Full single-level pass: response, box filter, peaks, cascade, refine.

    Returns the surviving candidates plus the box-filtered response raster
    (handy for callers that want diagnostics).
    """
    from .image import box_filter_2x2  # local import keeps module load cheap

    raw = corner_intensity(blurred, ring or SampleRing(config.ring_radius))
    filtered = box_filter_2x2(raw)
    peaks = nonmax_suppress(filtered, radius=config.nms_radius, floor=config.nms_floor)
    keep, _ = filter_cascade(peaks, filtered, blurred, top_level_max, config)
    peaks = peaks[keep]
    refined = meanshift_refine(
        filtered,
        peaks,
        window=config.meanshift_window,
        max_iter=config.meanshift_iters,
        tol=config.meanshift_tol,
        grid_offset=0.5,
    )
    ori, strength, contrast = spoke_orientation(blurred, refined, config.spoke_length)
    anchors_x = (peaks[:, 0] - 0.5).round().astype(np.int64) if len(peaks) else np.empty(0, np.int64)
    anchors_y = (peaks[:, 1] - 0.5).round().astype(np.int64) if len(peaks) else np.empty(0, np.int64)
    out = []
    for i in range(len(refined)):
        out.append(
            CornerCandidate(
                x=float(refined[i, 0]),
                y=float(refined[i, 1]),
                level=level,
                intensity_raw=float(filtered[anchors_y[i], anchors_x[i]]),
                intensity_spoke=float(strength[i]),
                orientation=float(ori[i]),
                contrast=float(contrast[i]),
            )
        )
    return out, filtered
