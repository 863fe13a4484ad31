"""Aggregate affine motion from a tracked flow field.

Least squares for [A|b] over tracked correspondences with one round of
2-sigma residual trimming; the translation b is the reported motion, and
climbs to mm/s when a pixel scale is supplied.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from optobraille.errors import DegenerateGeometry, InsufficientPoints
from optobraille.motion.flow import FlowField


@dataclass(frozen=True)
class AffineMotion:
    A: np.ndarray                       # (2, 2)
    b: np.ndarray                       # (2,) pixels per frame interval
    inlier_count: int
    translation_mm_per_s: np.ndarray | None = None


def _fit(src: np.ndarray, dst: np.ndarray):
    design = np.hstack([src, np.ones((len(src), 1))])
    svals = np.linalg.svd(design, compute_uv=False)
    if svals[-1] < 1e-9 * max(svals[0], 1.0):
        raise DegenerateGeometry("tracked points are collinear")
    sol, *_ = np.linalg.lstsq(design, dst, rcond=None)
    A = sol[:2].T
    b = sol[2]
    return A, b


def estimate_motion(flow: FlowField, mm_per_pixel: float | None = None) -> AffineMotion:
    """Fit dst ~= A src + b over tracked points.

    Raises InsufficientPoints (< 3 tracked) or DegenerateGeometry
    (collinear sources).
    """
    src, dst = flow.tracked_arrays()
    if len(src) < 3:
        raise InsufficientPoints(f"{len(src)} tracked points, need >= 3")

    A, b = _fit(src, dst)

    resid = np.linalg.norm(dst - (src @ A.T + b), axis=1)
    sigma = float(np.sqrt(np.mean(resid ** 2)))
    inliers = np.ones(len(src), dtype=bool)
    if sigma > 1e-12:
        keep = resid <= 2.0 * sigma
        if keep.sum() >= 3 and not keep.all():
            try:
                A, b = _fit(src[keep], dst[keep])
                inliers = keep
            except DegenerateGeometry:
                pass  # trimmed set degenerate; keep the full fit

    translation = None
    if mm_per_pixel is not None:
        translation = b / flow.frame_interval * mm_per_pixel

    return AffineMotion(A=A, b=b, inlier_count=int(inliers.sum()),
                        translation_mm_per_s=translation)
