"""Sparse optical flow: per-point windowed least squares on the
brightness-constancy constraint, iteratively refined, with an optional
coarse-to-fine pyramid for displacements beyond the window's reach.

Points whose spatial-gradient normal matrix is near-singular (flat or
single-edge neighborhoods) are returned untracked.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.ndimage import uniform_filter

from optobraille.frame import as_array
from optobraille.imageops import bilinear_sample

MIN_EIGENVALUE = 1e-4
DEFAULT_WINDOW = 3


@dataclass(frozen=True)
class FlowPoint:
    src: tuple[float, float]
    dst: tuple[float, float] | None
    tracked: bool


@dataclass(frozen=True)
class FlowField:
    points: tuple[FlowPoint, ...]
    frame_interval: float

    def __post_init__(self):
        if self.frame_interval <= 0:
            raise ValueError("frame interval must be positive")

    def tracked_arrays(self):
        src = np.array([p.src for p in self.points if p.tracked], dtype=np.float64)
        dst = np.array([p.dst for p in self.points if p.tracked], dtype=np.float64)
        return src.reshape(-1, 2), dst.reshape(-1, 2)


def _window_offsets(window: int):
    half = window // 2
    oy, ox = np.mgrid[-half: half + 1, -half: half + 1]
    return ox.ravel().astype(np.float64), oy.ravel().astype(np.float64)


def _track_single_level(prev, nxt, gx, gy, pts, guess, window, iterations=12, tol=0.01):
    """One pyramid level of iterative flow refinement for all points."""
    ox, oy = _window_offsets(window)
    h, w = prev.shape
    flows = guess.copy()
    tracked = np.ones(len(pts), dtype=bool)

    sx = pts[:, 0][:, None] + ox[None, :]
    sy = pts[:, 1][:, None] + oy[None, :]
    in_bounds = ((pts[:, 0] >= window) & (pts[:, 0] <= w - 1 - window)
                 & (pts[:, 1] >= window) & (pts[:, 1] <= h - 1 - window))

    ix = bilinear_sample(gx, sx, sy, fill=0.0)
    iy = bilinear_sample(gy, sx, sy, fill=0.0)
    template = bilinear_sample(prev, sx, sy, fill=0.0)

    gxx = (ix * ix).sum(axis=1)
    gxy = (ix * iy).sum(axis=1)
    gyy = (iy * iy).sum(axis=1)
    tr = 0.5 * (gxx + gyy)
    det = np.sqrt(np.maximum((0.5 * (gxx - gyy)) ** 2 + gxy ** 2, 0.0))
    lam_min = (tr - det) / len(ox)  # per-pixel normalization
    tracked &= (lam_min >= MIN_EIGENVALUE) & in_bounds

    denom = gxx * gyy - gxy * gxy
    denom = np.where(np.abs(denom) < 1e-30, 1.0, denom)

    it = np.zeros_like(template)
    for _ in range(iterations):
        tx = sx + flows[:, 0][:, None]
        ty = sy + flows[:, 1][:, None]
        moved = bilinear_sample(nxt, tx, ty, fill=0.0)
        it = moved - template
        bx = -(ix * it).sum(axis=1)
        by = -(iy * it).sum(axis=1)
        du = (gyy * bx - gxy * by) / denom
        dv = (gxx * by - gxy * bx) / denom
        du = np.where(tracked, du, 0.0)
        dv = np.where(tracked, dv, 0.0)
        flows[:, 0] += du
        flows[:, 1] += dv
        if max(float(np.abs(du).max()), float(np.abs(dv).max())) < tol:
            break
    residual = np.abs(it).mean(axis=1)
    return flows, tracked, residual


def _downsample(img):
    return uniform_filter(img, 2)[::2, ::2]


def _pyramid_track(p, n, pts, window, pyramid_levels, max_residual):
    pyramids = [(p, n)]
    for _ in range(pyramid_levels - 1):
        lp, ln = pyramids[-1]
        if min(lp.shape) < 2 * (window + 2):
            break
        pyramids.append((_downsample(lp), _downsample(ln)))

    flows = np.zeros_like(pts)
    tracked = np.ones(len(pts), dtype=bool)
    for level in range(len(pyramids) - 1, -1, -1):
        lp, ln = pyramids[level]
        scale = 2.0 ** level
        gy, gx = np.gradient(lp)
        if level == 0:
            lv_flows, lv_tracked, residual = _track_single_level(
                lp, ln, gx, gy, pts / scale, flows / scale, window)
            # cross-check with a wider window: a solution that depends on
            # the window size is a mismatch, not a motion estimate
            wide_flows, wide_tracked, _ = _track_single_level(
                lp, ln, gx, gy, pts / scale, flows / scale, window + 4)
            agree = np.linalg.norm(lv_flows - wide_flows, axis=1) <= 0.5
            flows = lv_flows * scale
            tracked = lv_tracked & wide_tracked & agree & (residual <= max_residual)
        else:
            # coarse levels need context beyond the glyph periodicity of
            # printed text; demanding agreement between two window sizes
            # rejects period-aliased locks, which are window-dependent
            fa, ta, _ = _track_single_level(
                lp, ln, gx, gy, pts / scale, flows / scale, max(window, 9))
            fb, tb, _ = _track_single_level(
                lp, ln, gx, gy, pts / scale, flows / scale, max(window, 9) + 4)
            agree = np.linalg.norm(fa - fb, axis=1) <= 1.0
            flows = np.where(agree[:, None], 0.5 * (fa + fb), fa) * scale
            tracked &= ta & tb & agree
    return flows, tracked


def track_flow(prev, nxt, points, *, window: int = DEFAULT_WINDOW,
               pyramid_levels: int = 1, frame_interval: float = 1.0,
               max_residual: float = 0.3, fb_check: bool = True,
               fb_tol: float = 0.5) -> FlowField:
    """Track `points` from frame `prev` to frame `nxt`.

    pyramid_levels=1 is the plain single-scale solver (displacements up to
    about a pixel); 3 levels handle the simulator's inter-frame motion.
    Points are marked untracked when the window residual exceeds
    max_residual or the backward re-track misses the source by more than
    fb_tol pixels (periodic print patterns produce confident mismatches
    that only the round trip exposes).
    """
    p = as_array(prev)
    n = as_array(nxt)
    if p.shape != n.shape:
        raise ValueError("frames must have identical dimensions")
    pts = np.asarray(points, dtype=np.float64).reshape(-1, 2)
    if len(pts) == 0:
        return FlowField(points=(), frame_interval=frame_interval)

    flows, tracked = _pyramid_track(p, n, pts, window, pyramid_levels, max_residual)

    if fb_check and tracked.any():
        back_flows, back_tracked = _pyramid_track(
            n, p, pts + flows, window, pyramid_levels, max_residual)
        fb_err = np.linalg.norm(flows + back_flows, axis=1)
        tracked &= back_tracked & (fb_err <= fb_tol)

    out = []
    for i, (x, y) in enumerate(pts):
        if tracked[i]:
            out.append(FlowPoint(src=(float(x), float(y)),
                                 dst=(float(x + flows[i, 0]), float(y + flows[i, 1])),
                                 tracked=True))
        else:
            out.append(FlowPoint(src=(float(x), float(y)), dst=None, tracked=False))
    return FlowField(points=tuple(out), frame_interval=frame_interval)
