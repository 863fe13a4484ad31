"""Thin-plate-spline fitting and image flattening.

Kernel U(r) = r^2 log r with U(0) = 0. The smoothing parameter trades
interpolation accuracy against bending energy: lambda = 0 interpolates
the control points exactly, lambda -> inf tends to the best affine fit.

Image application uses backward mapping: output pixel p is sampled from
the input at f(p), so warping with a fitted translation (+dx, +dy) moves
image content by (-dx, -dy).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from optobraille.errors import DegenerateConfiguration
from optobraille.frame import Frame
from optobraille.imageops import bilinear_sample

SIDE_CONDITION_TOL = 1e-8


def _kernel(r2: np.ndarray) -> np.ndarray:
    """U(r) = r^2 log r written on squared distances: 0.5 * r^2 log r^2."""
    out = np.zeros_like(r2)
    pos = r2 > 0
    out[pos] = 0.5 * r2[pos] * np.log(r2[pos])
    return out


@dataclass(frozen=True)
class TpsWarp:
    """Fitted warp f: R^2 -> R^2 mapping source points toward targets."""

    control_points: np.ndarray   # (K, 2) source coordinates
    weights: np.ndarray          # (K, 2) kernel coefficients per output dim
    affine_part: np.ndarray      # (2, 3) rows [a0, ax, ay] per output dim
    lam: float

    def __call__(self, points: np.ndarray) -> np.ndarray:
        return transform_points(self, points)

    def bending_energy(self) -> float:
        """w^T K w summed over output dimensions (the discrete bending
        term; zero for pure affine warps)."""
        d = self.control_points[:, None, :] - self.control_points[None, :, :]
        K = _kernel((d ** 2).sum(-1))
        return float(sum(self.weights[:, j] @ K @ self.weights[:, j] for j in range(2)))


def _assert_not_collinear(src: np.ndarray):
    if len(src) < 3:
        raise DegenerateConfiguration("need at least 3 control points")
    centered = src - src.mean(axis=0)
    svals = np.linalg.svd(centered, compute_uv=False)
    if svals[-1] < 1e-9 * max(svals[0], 1.0):
        raise DegenerateConfiguration("source control points are collinear")


def fit_tps(pairs, lam: float = 0.0) -> TpsWarp:
    """Fit a TPS from (src, dst) point pairs.

    Solves the standard augmented linear system
        [K + lam*I  P] [w]   [dst]
        [P^T        0] [a] = [0]
    whose last three rows impose the side conditions sum(w) = 0 and
    orthogonality of w to the source coordinates.
    """
    if lam < 0:
        raise ValueError("lambda must be >= 0")
    src = np.asarray([p[0] for p in pairs], dtype=np.float64)
    dst = np.asarray([p[1] for p in pairs], dtype=np.float64)
    _assert_not_collinear(src)

    k = len(src)
    d = src[:, None, :] - src[None, :, :]
    K = _kernel((d ** 2).sum(-1)) + lam * np.eye(k)
    P = np.hstack([np.ones((k, 1)), src])

    A = np.zeros((k + 3, k + 3))
    A[:k, :k] = K
    A[:k, k:] = P
    A[k:, :k] = P.T
    rhs = np.zeros((k + 3, 2))
    rhs[:k] = dst

    try:
        sol = np.linalg.solve(A, rhs)
    except np.linalg.LinAlgError as exc:
        raise DegenerateConfiguration(f"singular TPS system: {exc}") from exc

    weights = sol[:k]
    affine = sol[k:].T  # (2, 3): [const, x, y] per output dimension
    return TpsWarp(control_points=src, weights=weights, affine_part=affine, lam=float(lam))


def transform_points(warp: TpsWarp, points: np.ndarray) -> np.ndarray:
    """Evaluate f at an (N, 2) array of points."""
    pts = np.asarray(points, dtype=np.float64)
    single = pts.ndim == 1
    pts = np.atleast_2d(pts)

    d = pts[:, None, :] - warp.control_points[None, :, :]
    U = _kernel((d ** 2).sum(-1))          # (N, K)
    ones = np.ones((len(pts), 1))
    P = np.hstack([ones, pts])             # (N, 3)
    out = P @ warp.affine_part.T + U @ warp.weights
    return out[0] if single else out


def apply_tps(warp: TpsWarp, frame: Frame, fill: float = 1.0) -> Frame:
    """Warp a frame by backward mapping through f (bilinear sampling)."""
    h, w = frame.data.shape[:2]
    ys, xs = np.mgrid[0:h, 0:w].astype(np.float64)
    pts = np.stack([xs.ravel(), ys.ravel()], axis=1)
    mapped = transform_points(warp, pts)
    sx = mapped[:, 0].reshape(h, w)
    sy = mapped[:, 1].reshape(h, w)
    return Frame(bilinear_sample(frame.data, sx, sy, fill=fill), frame.t)
