"""Segment-test corner detection (16-pixel ring, radius 3).

A pixel is a corner when >= `arc` contiguous ring pixels are all brighter
than center + t or all darker than center - t. The implementation is
fully vectorized over the frame; non-max suppression keeps ring-score
maxima in 3x3 neighborhoods. Threshold is given in 8-bit gray levels to
match the conventional parameterization.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter

from optobraille.frame import as_array

# clockwise ring offsets (dx, dy), radius 3
RING = [
    (0, -3), (1, -3), (2, -2), (3, -1), (3, 0), (3, 1), (2, 2), (1, 3),
    (0, 3), (-1, 3), (-2, 2), (-3, 1), (-3, 0), (-3, -1), (-2, -2), (-1, -3),
]


def _ring_views(img: np.ndarray):
    h, w = img.shape
    core = img[3:h - 3, 3:w - 3]
    views = [img[3 + dy: h - 3 + dy, 3 + dx: w - 3 + dx] for dx, dy in RING]
    return core, views


def _contiguous_arc(flags: np.ndarray, arc: int) -> np.ndarray:
    """flags: (16, H, W) bool; True where any circular run of `arc`
    consecutive ring positions is all True."""
    wrapped = np.concatenate([flags, flags[: arc - 1]], axis=0)
    out = np.zeros(flags.shape[1:], dtype=bool)
    for s in range(16):
        out |= np.all(wrapped[s: s + arc], axis=0)
    return out


def detect_corners(gray, mask: np.ndarray | None = None, *,
                   threshold: float = 20.0, arc: int = 9,
                   nonmax: bool = True) -> np.ndarray:
    """Detect ring-test corners; returns an (N, 2) array of (x, y).

    `gray` is a Frame or [0, 1] array; `mask` (same dims) drops corners
    off the page surface. May return an empty array.
    """
    img = as_array(gray)
    if img.ndim != 2:
        raise ValueError("corner detection expects a grayscale image")
    if mask is not None and mask.shape != img.shape:
        raise ValueError("mask dimensions must match the frame")
    h, w = img.shape
    if h < 8 or w < 8:
        return np.empty((0, 2), dtype=np.int64)

    t = threshold / 255.0
    core, views = _ring_views(img)

    # compass pre-test: any contiguous arc of >= 9 ring pixels covers at
    # least 2 of the 4 cardinal positions (spacing 4), so fewer than 2
    # one-sided cardinals rules a pixel out
    cardinal = [views[0], views[4], views[8], views[12]]
    nb = sum((v > core + t).astype(np.uint8) for v in cardinal)
    nd = sum((v < core - t).astype(np.uint8) for v in cardinal)
    candidates = (nb >= 2) | (nd >= 2)
    if not candidates.any():
        return np.empty((0, 2), dtype=np.int64)

    cys, cxs = np.nonzero(candidates)
    ring = np.stack([v[cys, cxs] for v in views], axis=0)  # (16, N)
    center = core[cys, cxs]

    brighter = ring > center[None] + t
    darker = ring < center[None] - t
    wrap_b = np.concatenate([brighter, brighter[: arc - 1]], axis=0)
    wrap_d = np.concatenate([darker, darker[: arc - 1]], axis=0)
    is_corner = np.zeros(len(cys), dtype=bool)
    for s in range(16):
        is_corner |= np.all(wrap_b[s: s + arc], axis=0) | np.all(wrap_d[s: s + arc], axis=0)
    if not is_corner.any():
        return np.empty((0, 2), dtype=np.int64)

    # ring contrast score for suppression and ordering
    diff = ring - center[None]
    cand_score = np.maximum((diff * brighter).sum(axis=0), (-diff * darker).sum(axis=0))
    corners = np.zeros_like(core, dtype=bool)
    corners[cys[is_corner], cxs[is_corner]] = True
    score = np.zeros_like(core)
    score[cys[is_corner], cxs[is_corner]] = cand_score[is_corner]

    if nonmax:
        local_max = score >= maximum_filter(score, size=3)
        keep = corners & local_max
    else:
        keep = corners

    ys, xs = np.nonzero(keep)
    xs = xs + 3
    ys = ys + 3
    if mask is not None:
        sel = mask[ys, xs]
        xs, ys = xs[sel], ys[sel]
    order = np.argsort(-score[ys - 3, xs - 3], kind="stable")
    return np.stack([xs[order], ys[order]], axis=1).astype(np.int64)
