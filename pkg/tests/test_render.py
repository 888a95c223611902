import math

import numpy as np
import pytest

import helpers
from chessgrid.render import (
    SceneSpec,
    apply_homography,
    blur_sweep,
    center_pose,
    gaussian_blur,
    ground_truth,
    render,
)

TRANSLATE = np.array([[1.0, 0.0, 40.0], [0.0, 1.0, 40.0], [0.0, 0.0, 1.0]])


def translate_spec(**kw):
    base = dict(
        squares_rows=5,
        squares_cols=4,
        square_size=20.0,
        image_width=180,
        image_height=180,
        homography=TRANSLATE,
    )
    base.update(kw)
    return SceneSpec(**base)


def test_ground_truth_translate_grid():
    gt = ground_truth(translate_spec())
    assert gt.shape == (4, 3)
    k = 0
    for i in range(4):
        for j in range(3):
            assert gt.corners[k, 0] == 40.0 + 20.0 * (j + 1)
            assert gt.corners[k, 1] == 40.0 + 20.0 * (i + 1)
            k += 1


def test_ground_truth_projective_formula():
    h = np.array([[0.9, 0.1, 30.0], [-0.05, 1.1, 25.0], [1e-4, -2e-4, 1.0]])
    spec = SceneSpec(
        squares_rows=3,
        squares_cols=3,
        square_size=15.0,
        image_width=200,
        image_height=200,
        homography=h,
    )
    gt = ground_truth(spec)
    k = 0
    for i in range(2):
        for j in range(2):
            bx, by = (j + 1) * 15.0, (i + 1) * 15.0
            w = h[2, 0] * bx + h[2, 1] * by + h[2, 2]
            assert gt.corners[k, 0] == pytest.approx((h[0, 0] * bx + h[0, 1] * by + h[0, 2]) / w, abs=1e-12)
            assert gt.corners[k, 1] == pytest.approx((h[1, 0] * bx + h[1, 1] * by + h[1, 2]) / w, abs=1e-12)
            k += 1


def test_ground_truth_ignores_rendering_knobs():
    a = ground_truth(translate_spec())
    b = ground_truth(translate_spec(supersample=1, blur_sigma=2.0, noise_sigma=0.05, seed=9))
    assert a.shape == b.shape
    assert np.array_equal(a.corners, b.corners)


def test_render_square_interiors_exact():
    img, _ = render(translate_spec())
    assert img.dtype == np.float32
    assert img.shape == (180, 180)
    # square (0,0) spans [40,60]^2: its center pixel is fully dark
    assert img[50, 50] == np.float32(0.1)
    # square (0,1) is light, and far off-board is background
    assert img[50, 70] == np.float32(0.9)
    assert img[5, 5] == np.float32(0.9)
    assert img.min() >= 0.0 and img.max() <= 1.0


def test_render_matches_subsample_oracle():
    spec = translate_spec()
    img, _ = render(spec)
    s = spec.supersample
    offs = [(k + 0.5) / s - 0.5 for k in range(s)]
    for py, px in [(60, 60), (60, 59), (40, 73), (100, 80), (120, 41), (39, 39)]:
        vals = []
        for oy in offs:
            for ox in offs:
                bx, by = (px + ox) - 40.0, (py + oy) - 40.0
                inside = 0.0 <= bx <= 80.0 and 0.0 <= by <= 100.0
                dark = inside and (int(math.floor(by / 20.0)) + int(math.floor(bx / 20.0))) % 2 == 0
                vals.append(0.1 if dark else 0.9)
        assert img[py, px] == pytest.approx(np.float64(vals).mean(), abs=1e-6)


def test_render_matches_area_coverage():
    spec = translate_spec()
    img, _ = render(spec)
    s = spec.supersample
    bound = (0.9 - 0.1) / (2.0 * s) + 1e-6
    rng = np.random.default_rng(3)
    for _ in range(60):
        px = int(rng.integers(35, 130))
        py = int(rng.integers(35, 150))
        want = helpers.coverage_axis_aligned(40.0, 40.0, 20.0, 5, 4, px, py, 0.1, 0.9)
        assert abs(float(img[py, px]) - want) <= bound


def test_render_rotated_pose_oracle():
    hom = center_pose((200, 170), (4, 4), 24.0, angle_deg=25.0)
    spec = SceneSpec(
        squares_rows=4,
        squares_cols=4,
        square_size=24.0,
        image_width=200,
        image_height=170,
        homography=hom,
    )
    img, _ = render(spec)
    hinv = np.linalg.inv(spec.homography)
    s = spec.supersample
    offs = [(k + 0.5) / s - 0.5 for k in range(s)]
    rng = np.random.default_rng(11)
    for _ in range(25):
        px = int(rng.integers(0, 200))
        py = int(rng.integers(0, 170))
        vals = []
        for oy in offs:
            for ox in offs:
                gx, gy = px + ox, py + oy
                den = hinv[2, 0] * gx + hinv[2, 1] * gy + hinv[2, 2]
                bx = (hinv[0, 0] * gx + hinv[0, 1] * gy + hinv[0, 2]) / den
                by = (hinv[1, 0] * gx + hinv[1, 1] * gy + hinv[1, 2]) / den
                inside = 0.0 <= bx <= 96.0 and 0.0 <= by <= 96.0
                dark = inside and (int(math.floor(by / 24.0)) + int(math.floor(bx / 24.0))) % 2 == 0
                vals.append(0.1 if dark else 0.9)
        assert img[py, px] == pytest.approx(np.float64(vals).mean(), abs=1e-6)


def test_render_deterministic_with_noise():
    spec = translate_spec(noise_sigma=0.05, seed=7, blur_sigma=1.0)
    a, _ = render(spec)
    b, _ = render(translate_spec(noise_sigma=0.05, seed=7, blur_sigma=1.0))
    assert np.array_equal(a, b)
    c, _ = render(translate_spec(noise_sigma=0.05, seed=8, blur_sigma=1.0))
    assert not np.array_equal(a, c)


def test_blur_sweep_shares_everything_but_sigma():
    spec = translate_spec(noise_sigma=0.02, seed=5)
    sweep = blur_sweep(spec, [0.0, 1.0, 2.0, 4.0])
    assert [s for s, _, _ in sweep] == [0.0, 1.0, 2.0, 4.0]
    base, gt0 = render(spec)
    assert np.array_equal(sweep[0][1], base)
    for _, img, gt in sweep:
        assert np.array_equal(gt.corners, gt0.corners)
        assert img.shape == base.shape
    again = blur_sweep(spec, [0.0, 1.0, 2.0, 4.0])
    for (_, a, _), (_, b, _) in zip(sweep, again):
        assert np.array_equal(a, b)


def test_blur_smooths_monotonically():
    sweep = blur_sweep(translate_spec(), [0.0, 1.0, 2.0, 4.0])
    spans = [float(np.abs(np.diff(img[60].astype(np.float64))).max()) for _, img, _ in sweep]
    assert spans[0] > spans[1] > spans[2] > spans[3]


def test_offscreen_board_rejected():
    bad = TRANSLATE.copy()
    bad[0, 2] = -500.0
    with pytest.raises(ValueError):
        render(translate_spec(homography=bad))


def test_backfacing_board_rejected():
    bad = TRANSLATE.copy()
    bad[2, 2] = -1.0
    with pytest.raises(ValueError):
        render(translate_spec(homography=bad))


def test_spec_validation():
    with pytest.raises(ValueError):
        translate_spec(squares_rows=1)
    with pytest.raises(ValueError):
        translate_spec(supersample=0)


def test_center_pose_centers_corners():
    hom = center_pose((320, 240), (5, 4), 22.0)
    spec = SceneSpec(
        squares_rows=5,
        squares_cols=4,
        square_size=22.0,
        image_width=320,
        image_height=240,
        homography=hom,
    )
    gt = ground_truth(spec)
    assert gt.corners[:, 0].mean() == pytest.approx((320 - 1) / 2.0, abs=1e-9)
    assert gt.corners[:, 1].mean() == pytest.approx((240 - 1) / 2.0, abs=1e-9)


def test_center_pose_rotation_moves_corners():
    cx, cy = (320 - 1) / 2.0, (240 - 1) / 2.0
    g0 = ground_truth(
        SceneSpec(5, 4, 22.0, 320, 240, center_pose((320, 240), (5, 4), 22.0))
    )
    g90 = ground_truth(
        SceneSpec(5, 4, 22.0, 320, 240, center_pose((320, 240), (5, 4), 22.0, angle_deg=90.0))
    )
    rot = np.stack(
        [cx - (g0.corners[:, 1] - cy), cy + (g0.corners[:, 0] - cx)], axis=1
    )
    assert np.allclose(g90.corners, rot, atol=1e-9)


def test_gaussian_blur_basics():
    img = np.full((20, 20), 0.37, dtype=np.float32)
    assert np.allclose(gaussian_blur(img, 1.5), img, atol=1e-6)
    ramp = np.tile(np.arange(20, dtype=np.float32), (20, 1))
    assert gaussian_blur(ramp, 0.0) is ramp


def test_apply_homography_identity():
    pts = np.array([[3.0, 4.0], [0.0, 0.0]])
    assert np.array_equal(apply_homography(np.eye(3), pts), pts)
