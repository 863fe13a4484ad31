"""Fisheye camera model: projection, forward distortion, and undistortion.

The model maps a pinhole ray (x', y') through the angular substitution
theta = atan(r), applies the quartic-in-theta^2 radial polynomial, and
scales back onto the ray direction. Undistortion removes only the
polynomial part: the rectified image is the pure-theta (all-zero
coefficient) rendering, so zero coefficients make undistortion the
identity.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from optobraille.errors import PointBehindCamera
from optobraille.frame import Frame
from optobraille.imageops import bilinear_sample


@dataclass(frozen=True)
class CameraIntrinsics:
    fx: float
    fy: float
    cx: float
    cy: float

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")


@dataclass(frozen=True)
class FisheyeDistortion:
    k1: float = 0.0
    k2: float = 0.0
    k3: float = 0.0
    k4: float = 0.0

    def __post_init__(self):
        for k in (self.k1, self.k2, self.k3, self.k4):
            if not np.isfinite(k):
                raise ValueError("distortion coefficients must be finite")

    @property
    def coeffs(self) -> np.ndarray:
        return np.array([self.k1, self.k2, self.k3, self.k4])


@dataclass(frozen=True)
class RigidPose:
    R: np.ndarray
    T: np.ndarray

    ORTHONORMAL_TOL = 1e-9

    def __post_init__(self):
        R = np.asarray(self.R, dtype=np.float64)
        T = np.asarray(self.T, dtype=np.float64).reshape(3)
        object.__setattr__(self, "R", R)
        object.__setattr__(self, "T", T)
        if R.shape != (3, 3):
            raise ValueError("R must be 3x3")
        if not np.allclose(R @ R.T, np.eye(3), atol=self.ORTHONORMAL_TOL):
            raise ValueError("R must be orthonormal")
        if abs(np.linalg.det(R) - 1.0) > self.ORTHONORMAL_TOL:
            raise ValueError("R must have determinant +1")

    @staticmethod
    def identity() -> "RigidPose":
        return RigidPose(np.eye(3), np.zeros(3))


def _poly_factor(theta: np.ndarray, k: np.ndarray) -> np.ndarray:
    """1 + k1*theta^2 + k2*theta^4 + k3*theta^6 + k4*theta^8."""
    t2 = theta * theta
    return 1.0 + t2 * (k[0] + t2 * (k[1] + t2 * (k[2] + t2 * k[3])))


def _theta_scale(r: np.ndarray, k: np.ndarray) -> np.ndarray:
    """theta'(r) / r with the r -> 0 limit taken by series expansion.

    theta'/r = (atan(r)/r) * poly(theta); atan(r)/r -> 1 - r^2/3 as r -> 0,
    so the scale tends to 1 exactly at the principal point.
    """
    r = np.asarray(r, dtype=np.float64)
    small = r < 1e-6
    r_safe = np.where(small, 1.0, r)
    theta = np.arctan(r)
    direct = theta / r_safe * _poly_factor(theta, k)
    # two series terms: error O(r^4) < 1e-24 inside the small branch
    series = 1.0 + (k[0] - 1.0 / 3.0) * r * r
    return np.where(small, series, direct)


def distort_normalized(xn: np.ndarray, yn: np.ndarray, dist: FisheyeDistortion):
    """Apply the full theta mapping to pinhole-normalized coordinates."""
    r = np.hypot(xn, yn)
    s = _theta_scale(r, dist.coeffs)
    return s * xn, s * yn


def project_fisheye(world_point, pose: RigidPose, intr: CameraIntrinsics,
                    dist: FisheyeDistortion) -> tuple[float, float]:
    """Project a 3-D world point to distorted pixel coordinates (u, v)."""
    p = pose.R @ np.asarray(world_point, dtype=np.float64).reshape(3) + pose.T
    if p[2] <= 0:
        raise PointBehindCamera(f"camera-frame z = {p[2]:.6g} <= 0")
    xn, yn = p[0] / p[2], p[1] / p[2]
    xd, yd = distort_normalized(np.float64(xn), np.float64(yn), dist)
    return float(intr.fx * xd + intr.cx), float(intr.fy * yd + intr.cy)


def invert_distortion(rho: np.ndarray, dist: FisheyeDistortion,
                      iterations: int = 12) -> np.ndarray:
    """Solve theta' = theta * poly(theta) for theta given theta' = rho.

    Newton iteration; rho is the radial coordinate of the distorted image
    normalized plane. Used when synthesizing distorted imagery.
    """
    k = dist.coeffs
    rho = np.asarray(rho, dtype=np.float64)
    theta = rho.copy()
    for _ in range(iterations):
        t2 = theta * theta
        f = theta * _poly_factor(theta, k) - rho
        df = 1.0 + t2 * (3.0 * k[0] + t2 * (5.0 * k[1] + t2 * (7.0 * k[2] + t2 * 9.0 * k[3])))
        theta = theta - f / np.maximum(df, 1e-12)
    return theta


class UndistortMap:
    """Precomputed backward remap grid for one (intrinsics, distortion,
    size) triple; reused across every frame at runtime.

    By default an output pixel (u, v) lies in the pure-theta rectified
    image: its normalized radius equals theta, so the source (distorted)
    pixel sits at radius theta * poly(theta) along the same ray, and zero
    coefficients make the map the identity. With perspective=True the
    target is the gnomonic (tan-theta) plane instead, which renders a
    fronto-parallel page at uniform scale across the whole frame.
    """

    def __init__(self, intr: CameraIntrinsics, dist: FisheyeDistortion,
                 width: int, height: int, fill: float = 1.0,
                 perspective: bool = False):
        self.intr = intr
        self.dist = dist
        self.width = width
        self.height = height
        self.fill = fill
        self.perspective = perspective

        ys, xs = np.mgrid[0:height, 0:width].astype(np.float64)
        xn = (xs - intr.cx) / intr.fx
        yn = (ys - intr.cy) / intr.fy
        rho = np.hypot(xn, yn)
        if perspective:
            theta = np.arctan(rho)
            src_rho = theta * _poly_factor(theta, dist.coeffs)
            scale = np.where(rho > 1e-12, src_rho / np.maximum(rho, 1e-12), 1.0)
        else:
            # rectified radius equals theta: the remap scale is poly(theta)
            scale = _poly_factor(rho, dist.coeffs)
        self._src_x = intr.cx + intr.fx * xn * scale
        self._src_y = intr.cy + intr.fy * yn * scale

        # the grid never changes: bake the bilinear gather indices/weights
        x = self._src_x
        y = self._src_y
        self._valid = (x >= 0) & (x <= width - 1) & (y >= 0) & (y <= height - 1)
        x0 = np.clip(np.floor(x).astype(np.int64), 0, width - 2)
        y0 = np.clip(np.floor(y).astype(np.int64), 0, height - 2)
        fx_w = np.where(self._valid, x - x0, 0.0)
        fy_w = np.where(self._valid, y - y0, 0.0)
        self._flat00 = (y0 * width + x0).ravel()
        self._w00 = ((1 - fx_w) * (1 - fy_w)).ravel()
        self._w01 = (fx_w * (1 - fy_w)).ravel()
        self._w10 = ((1 - fx_w) * fy_w).ravel()
        self._w11 = (fx_w * fy_w).ravel()

    def apply(self, frame: Frame) -> Frame:
        data = frame.data
        if data.shape[0] != self.height or data.shape[1] != self.width:
            out = bilinear_sample(data, self._src_x, self._src_y, fill=self.fill)
            return Frame(out, frame.t)
        h, w = self.height, self.width
        idx = self._flat00
        if data.ndim == 3:
            flat = data.reshape(-1, data.shape[2])
            out = (flat[idx] * self._w00[:, None] + flat[idx + 1] * self._w01[:, None]
                   + flat[idx + w] * self._w10[:, None] + flat[idx + w + 1] * self._w11[:, None])
            out = out.reshape(h, w, data.shape[2])
            out[~self._valid] = self.fill
        else:
            flat = data.ravel()
            out = (flat[idx] * self._w00 + flat[idx + 1] * self._w01
                   + flat[idx + w] * self._w10 + flat[idx + w + 1] * self._w11)
            out = out.reshape(h, w)
            out[~self._valid] = self.fill
        return Frame(out, frame.t)


def undistort_image(frame: Frame, intr: CameraIntrinsics, dist: FisheyeDistortion,
                    fill: float = 1.0) -> Frame:
    """Rectify a distorted frame (one-shot; build an UndistortMap for
    repeated use)."""
    if frame.data.size == 0:
        raise ValueError("frame is empty")
    return UndistortMap(intr, dist, frame.width, frame.height, fill=fill).apply(frame)
