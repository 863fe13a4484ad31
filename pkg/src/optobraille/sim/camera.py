"""Synthetic finger camera: images the rendered page through the fisheye
model, embeds the blue device wedge at the finger position, and adds
sensor noise.

The camera looks straight down from a fixed height; for each sensor pixel
the page offset (mm) is precomputed by inverting the radial polynomial,
so per-frame imaging is a single bilinear gather. The wedge is drawn in
pixel space with its apex at the projected finger position, which is what
the fingertip detector must recover.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from optobraille.frame import Frame
from optobraille.imageops import bilinear_sample, rotate_coords
from optobraille.imaging.fisheye import (
    CameraIntrinsics,
    FisheyeDistortion,
    UndistortMap,
    invert_distortion,
)

DEVICE_BLUE = (0.12, 0.22, 0.85)


@dataclass(frozen=True)
class SimCameraConfig:
    width: int = 320
    height: int = 240
    focal_px: float = 240.0
    height_mm: float = 30.0       # camera height above the page
    distortion: FisheyeDistortion = FisheyeDistortion(0.06, 0.02, 0.0, 0.0)
    look_ahead_mm: float = 0.0    # view-center offset up-page from the finger
    wedge_width_mm: float = 10.0
    noise_sigma: float = 0.0

    @property
    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.focal_px, self.focal_px,
                                (self.width - 1) / 2.0, (self.height - 1) / 2.0)

    @property
    def px_per_mm(self) -> float:
        """Image scale at the view center (after undistortion)."""
        return self.focal_px / self.height_mm


class SimCamera:
    """Precomputes the pixel -> page-offset grid for one configuration."""

    def __init__(self, cfg: SimCameraConfig):
        self.cfg = cfg
        intr = cfg.intrinsics
        ys, xs = np.mgrid[0: cfg.height, 0: cfg.width].astype(np.float64)
        xn = (xs - intr.cx) / intr.fx
        yn = (ys - intr.cy) / intr.fy
        rho = np.hypot(xn, yn)
        theta = invert_distortion(rho, cfg.distortion)
        r = np.tan(theta)
        scale = np.where(rho > 1e-12, r / np.maximum(rho, 1e-12), 1.0)
        self._off_x_mm = xn * scale * cfg.height_mm
        self._off_y_mm = yn * scale * cfg.height_mm
        # perspective target: uniform px_per_mm across the rectified frame
        self._undistort = UndistortMap(intr, cfg.distortion, cfg.width, cfg.height,
                                       perspective=True)

    def undistort(self, frame: Frame) -> Frame:
        return self._undistort.apply(frame)

    def finger_pixel(self) -> tuple[float, float]:
        """Distorted pixel of the finger position (the wedge apex)."""
        cfg = self.cfg
        intr = cfg.intrinsics
        # finger sits look_ahead_mm below the view center on the page
        yn = cfg.look_ahead_mm / cfg.height_mm
        r = abs(yn)
        if r < 1e-12:
            return (intr.cx, intr.cy)
        theta = np.arctan(r)
        k = cfg.distortion.coeffs
        t2 = theta * theta
        theta_p = theta * (1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3]))))
        return (intr.cx, intr.cy + intr.fy * np.sign(yn) * theta_p)

    def capture(self, page: Frame, page_dpmm: float, finger_x_mm: float,
                finger_y_mm: float, yaw_rad: float = 0.0,
                rng: np.random.Generator | None = None, t: float = 0.0,
                draw_wedge: bool = True) -> Frame:
        """Image the page with the finger at (x, y) mm; RGB output."""
        cfg = self.cfg
        off_x, off_y = self._off_x_mm, self._off_y_mm
        if yaw_rad != 0.0:
            off_x, off_y = rotate_coords(off_x, off_y, yaw_rad, 0.0, 0.0)
        cx_mm = finger_x_mm
        cy_mm = finger_y_mm - cfg.look_ahead_mm
        sample_x = (cx_mm + off_x) * page_dpmm
        sample_y = (cy_mm + off_y) * page_dpmm
        gray = bilinear_sample(page.data, sample_x, sample_y, fill=0.25)
        rgb = np.repeat(gray[..., None], 3, axis=2)

        if draw_wedge:
            ax, ay = self.finger_pixel()
            half_w = cfg.wedge_width_mm / 2.0 * cfg.px_per_mm
            ys, xs = np.mgrid[0: cfg.height, 0: cfg.width].astype(np.float64)
            dy = ys - ay
            # min half-width 0.6 px keeps the apex itself inked so the
            # topmost contour pixel is the finger position
            width = np.maximum(0.6, half_w * dy / max(cfg.height - ay, 1.0))
            inside = (dy >= -0.5) & (np.abs(xs - ax) <= width)
            rgb[inside] = DEVICE_BLUE

        if rng is not None and cfg.noise_sigma > 0:
            rgb = rgb + rng.normal(0.0, cfg.noise_sigma, size=rgb.shape)
        return Frame(np.clip(rgb, 0.0, 1.0), t)
