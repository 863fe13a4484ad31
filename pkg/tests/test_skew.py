import numpy as np
import pytest

from optobraille.errors import NoLinesFound
from optobraille.frame import Frame
from optobraille.imageops import rotate_image
from optobraille.page import deskew, detect_skew
from optobraille.sim import PageLayout, render_page


@pytest.fixture(scope="module")
def text_region():
    layout = PageLayout(text=("the quick brown fox jumps over a lazy dog",) * 3)
    page = render_page(layout, 4.0)
    return page.data[140:260, 80:560]


def test_unrotated_page_near_zero(text_region):
    angle = detect_skew(Frame(text_region))
    assert abs(np.degrees(angle)) <= 0.2


@pytest.mark.parametrize("deg", [-10, -7, -5, -2, 2, 5, 7, 10])
def test_rotation_grid_recovered(text_region, deg):
    rotated = Frame(rotate_image(text_region, np.radians(deg), fill=1.0))
    angle = detect_skew(rotated)
    assert abs(np.degrees(angle) - deg) <= 0.5


def test_blank_page_raises():
    with pytest.raises(NoLinesFound):
        detect_skew(Frame(np.ones((120, 400))))


def test_near_blank_noise_raises():
    rng = np.random.default_rng(0)
    noisy = np.clip(0.95 + rng.normal(0, 0.01, size=(120, 400)), 0, 1)
    with pytest.raises(NoLinesFound):
        detect_skew(Frame(noisy))


def test_deskew_zero_angle_is_identity(text_region):
    out = deskew(Frame(text_region), 0.0)
    assert np.array_equal(out.data, text_region)


def test_deskew_round_trip_corners(text_region):
    # mark four impulse corners, rotate, deskew, and check their positions
    img = text_region.copy()
    marks = [(20, 20), (20, 440), (90, 20), (90, 440)]
    deg = 5.0
    rotated = rotate_image(img, np.radians(deg), fill=1.0)
    restored = deskew(Frame(rotated), np.radians(deg)).data

    # compare a central block: the round trip must reproduce the original
    # within interpolation blur; use correlation peak displacement
    a = img[30:80, 100:380] - img[30:80, 100:380].mean()
    b = restored[30:80, 100:380] - restored[30:80, 100:380].mean()
    num = float((a * b).sum())
    den = float(np.sqrt((a ** 2).sum() * (b ** 2).sum()))
    assert num / den > 0.9  # content back in place

    # sub-pixel check via centroid of ink in a band around one word
    ink_o = img[30:80, 100:380] < 0.5
    ink_r = restored[30:80, 100:380] < 0.5
    co = np.array(np.nonzero(ink_o)).mean(axis=1)
    cr = np.array(np.nonzero(ink_r)).mean(axis=1)
    assert np.all(np.abs(co - cr) <= 1.0)


def test_center_impulse_fixed_under_deskew():
    img = np.ones((81, 81))
    img[40, 40] = 0.0
    for deg in (3.0, -8.0, 15.0):
        out = deskew(Frame(img), np.radians(deg), fill=1.0)
        assert out.data[40, 40] == pytest.approx(0.0, abs=1e-9)


def test_detect_then_deskew_residual(text_region):
    # composition property: residual skew after correction <= 0.5 degrees
    for deg in (-8, -3, 4, 9):
        rotated = Frame(rotate_image(text_region, np.radians(deg), fill=1.0))
        est = detect_skew(rotated)
        fixed = deskew(rotated, est)
        residual = detect_skew(fixed)
        assert abs(np.degrees(residual)) <= 0.5


def test_deskew_rejects_out_of_range_angle(text_region):
    with pytest.raises(ValueError):
        deskew(Frame(text_region), np.pi / 2)
