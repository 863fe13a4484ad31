"""Shared low-level raster operations: sampling, thresholds, color.

All samplers use (x, y) pixel coordinates where x is the column index and
y the row index; coordinate (0, 0) is the center of the top-left pixel.
"""

from __future__ import annotations

import numpy as np


def bilinear_sample(img: np.ndarray, x: np.ndarray, y: np.ndarray, fill: float = 1.0) -> np.ndarray:
    """Sample `img` at float coordinates with bilinear interpolation.

    Out-of-range coordinates return `fill`. Works on (H, W) and (H, W, C)
    arrays; x/y may be any matching shape.
    """
    h, w = img.shape[:2]
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)

    # snap float jitter at the border back inside (1e-6 px tolerance)
    eps = 1e-6
    x = np.where((x < 0) & (x > -eps), 0.0, x)
    y = np.where((y < 0) & (y > -eps), 0.0, y)
    x = np.where((x > w - 1) & (x < w - 1 + eps), float(w - 1), x)
    y = np.where((y > h - 1) & (y < h - 1 + eps), float(h - 1), y)

    x0 = np.floor(x).astype(np.int64)
    y0 = np.floor(y).astype(np.int64)
    fx = x - x0
    fy = y - y0

    valid = (x >= 0) & (x <= w - 1) & (y >= 0) & (y <= h - 1)
    x0c = np.clip(x0, 0, w - 2)
    y0c = np.clip(y0, 0, h - 2)
    #.. recompute fractions against the clipped base so edge pixels
    # interpolate inside the image instead of reading past the border
    fx = np.where(valid, x - x0c, 0.0)
    fy = np.where(valid, y - y0c, 0.0)

    i00 = img[y0c, x0c]
    i01 = img[y0c, x0c + 1]
    i10 = img[y0c + 1, x0c]
    i11 = img[y0c + 1, x0c + 1]

    if img.ndim == 3:
        fx = fx[..., None]
        fy = fy[..., None]
        valid = valid[..., None]

    out = (i00 * (1 - fx) * (1 - fy) + i01 * fx * (1 - fy)
           + i10 * (1 - fx) * fy + i11 * fx * fy)
    return np.where(valid, out, fill)


def otsu_threshold(values: np.ndarray, bins: int = 256) -> float:
    """Otsu's between-class-variance-maximizing threshold.

    Returns a scalar t such that `values <= t` / `values > t` is the
    optimal two-class split of the histogram.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    lo, hi = float(v.min()), float(v.max())
    if hi <= lo:
        return lo
    hist, edges = np.histogram(v, bins=bins, range=(lo, hi))
    hist = hist.astype(np.float64)
    centers = 0.5 * (edges[:-1] + edges[1:])

    weight1 = np.cumsum(hist)
    weight2 = weight1[-1] - weight1
    mean1 = np.cumsum(hist * centers) / np.maximum(weight1, 1e-12)
    total_mean = (hist * centers).sum() / weight1[-1]
    mean2 = np.where(weight2 > 0, (total_mean * weight1[-1] - np.cumsum(hist * centers)) / np.maximum(weight2, 1e-12), 0.0)

    between = weight1 * weight2 * (mean1 - mean2) ** 2
    between[weight2 == 0] = -1.0
    return float(centers[int(np.argmax(between))])


# sRGB (D65) -> XYZ matrix, then XYZ -> L*a*b* with the D65 reference white.
_SRGB_TO_XYZ = np.array([
    [0.4124564, 0.3575761, 0.1804375],
    [0.2126729, 0.7151522, 0.0721750],
    [0.0193339, 0.1191920, 0.9503041],
])
_D65_WHITE = np.array([0.95047, 1.00000, 1.08883])


_LINEARIZE_LUT: np.ndarray | None = None
_LUT_SIZE = 4096


def _srgb_linear_lut() -> np.ndarray:
    global _LINEARIZE_LUT
    if _LINEARIZE_LUT is None:
        c = np.linspace(0.0, 1.0, _LUT_SIZE)
        _LINEARIZE_LUT = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    return _LINEARIZE_LUT


def rgb_to_lab(rgb: np.ndarray, exact: bool = False) -> np.ndarray:
    """Convert an (H, W, 3) sRGB array in [0, 1] to CIE L*a*b* (D65).

    The default path linearizes through a 4096-entry table (L* error
    below 0.05); exact=True evaluates the transfer function directly.
    """
    c = np.clip(rgb, 0.0, 1.0)
    if exact:
        linear = np.where(c <= 0.04045, c / 12.92, ((c + 0.055) / 1.055) ** 2.4)
    else:
        lut = _srgb_linear_lut()
        linear = lut[np.rint(c * (_LUT_SIZE - 1)).astype(np.int32)]
    xyz = linear @ _SRGB_TO_XYZ.T
    xyz = xyz / _D65_WHITE

    eps = 216.0 / 24389.0
    kappa = 24389.0 / 27.0
    f = np.where(xyz > eps, np.cbrt(xyz), (kappa * xyz + 16.0) / 116.0)

    L = 116.0 * f[..., 1] - 16.0
    a = 500.0 * (f[..., 0] - f[..., 1])
    b = 200.0 * (f[..., 1] - f[..., 2])
    return np.stack([L, a, b], axis=-1)


def rotate_coords(x: np.ndarray, y: np.ndarray, angle: float, cx: float, cy: float):
    """Rotate point coordinates by `angle` (radians, CCW in x-right/y-down
    raster convention) about (cx, cy)."""
    ca, sa = np.cos(angle), np.sin(angle)
    dx = x - cx
    dy = y - cy
    return cx + ca * dx - sa * dy, cy + sa * dx + ca * dy


def rotate_image(img: np.ndarray, angle: float, fill: float = 1.0) -> np.ndarray:
    """Rotate an image by `angle` about its center (backward-mapped,
    bilinear)."""
    h, w = img.shape[:2]
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    # backward map: sample source at the inverse rotation
    sx, sy = rotate_coords(xs, ys, -angle, cx, cy)
    return bilinear_sample(img, sx, sy, fill=fill)


def psnr(reference: np.ndarray, test: np.ndarray) -> float:
    """Peak signal-to-noise ratio in dB for [0, 1] images."""
    mse = float(np.mean((np.asarray(reference, dtype=np.float64) - np.asarray(test, dtype=np.float64)) ** 2))
    if mse == 0:
        return float("inf")
    return -10.0 * np.log10(mse)
