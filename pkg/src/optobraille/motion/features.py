"""Minimum-eigenvalue corner selection for track initialization.

Structure tensor over a box window; corners are local maxima of the
smaller eigenvalue above a quality fraction of the global best, thinned
to a minimum mutual distance, strongest first.
"""

from __future__ import annotations

import numpy as np
from scipy.ndimage import maximum_filter, uniform_filter

from optobraille.frame import as_array


def _gradients(img: np.ndarray):
    gy, gx = np.gradient(img)
    return gx, gy


def detect_features(gray, max_count: int, *, quality: float = 0.01,
                    min_distance: int = 7, window: int = 5) -> np.ndarray:
    """Up to max_count corners as an (N, 2) float array of (x, y),
    sorted by response descending. May return fewer or none."""
    if max_count < 1:
        raise ValueError("max_count must be >= 1")
    img = as_array(gray)
    if img.ndim != 2:
        raise ValueError("feature detection expects a grayscale image")

    gx, gy = _gradients(img)
    ixx = uniform_filter(gx * gx, window)
    iyy = uniform_filter(gy * gy, window)
    ixy = uniform_filter(gx * gy, window)

    tr = 0.5 * (ixx + iyy)
    det = np.sqrt(np.maximum((0.5 * (ixx - iyy)) ** 2 + ixy ** 2, 0.0))
    lam_min = tr - det

    best = float(lam_min.max())
    if best <= 0:
        return np.empty((0, 2))
    threshold = quality * best

    local_max = lam_min >= maximum_filter(lam_min, size=3)
    cand = (lam_min > threshold) & local_max
    # exclude a border margin where the window is truncated
    m = window // 2 + 1
    cand[:m] = cand[-m:] = False
    cand[:, :m] = cand[:, -m:] = False

    ys, xs = np.nonzero(cand)
    if len(xs) == 0:
        return np.empty((0, 2))
    scores = lam_min[ys, xs]
    order = np.argsort(-scores, kind="stable")

    taken: list[tuple[int, int]] = []
    min_d2 = float(min_distance) ** 2
    for i in order:
        x, y = int(xs[i]), int(ys[i])
        if all((x - tx) ** 2 + (y - ty) ** 2 >= min_d2 for tx, ty in taken):
            taken.append((x, y))
            if len(taken) >= max_count:
                break
    return np.array(taken, dtype=np.float64).reshape(-1, 2)
