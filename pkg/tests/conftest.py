import numpy as np
import pytest

from chessgrid.config import DetectorConfig
from chessgrid.detector import detect
from chessgrid.render import SceneSpec, center_pose, render


def make_scene(
    squares=(6, 5),
    size=(320, 260),
    angle=20.0,
    scale=0.9,
    tilt=(0.0, 0.0),
    blur=0.0,
    noise=0.0,
    seed=0,
):
    rows, cols = squares
    w, h = size
    span = np.hypot(rows, cols)
    sq = min(w, h) / span * scale
    hom = center_pose((w, h), (rows, cols), sq, angle_deg=angle, scale=1.0, tilt=tilt)
    return SceneSpec(
        squares_rows=rows,
        squares_cols=cols,
        square_size=sq,
        image_width=w,
        image_height=h,
        homography=hom,
        blur_sigma=blur,
        noise_sigma=noise,
        seed=seed,
    )


@pytest.fixture(scope="session")
def board_scene():
    spec = make_scene()
    img, truth = render(spec)
    return spec, img, truth


@pytest.fixture(scope="session")
def board_detection(board_scene):
    _, img, _ = board_scene
    return detect(img, DetectorConfig())
