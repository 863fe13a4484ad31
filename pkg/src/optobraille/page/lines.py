"""Text-line region extraction from corner points.

Corners are rasterized and aggregated into blobs by morphology, the blob
raster yields line segments whose longest member fixes the block angle,
and corners rotated into the block frame are 1-D clustered on y with a
gap threshold of half the nominal line pitch. Clusters map back to the
original frame as LineRegions ordered top to bottom.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from optobraille.geometry import Rect
from optobraille.imageops import rotate_coords
from optobraille.page.segments import detect_line_segments

DEFAULT_PITCH_PX = 40.0
MIN_CORNERS_PER_LINE = 8


@dataclass(frozen=True)
class LineRegion:
    id: int
    baseline_points: np.ndarray  # (N, 2) corner points ordered by x
    bbox: Rect
    angle: float
    corner_count: int


def _morph_structures(pitch_px: float, word_level: bool):
    """Structuring elements scaled to the nominal line pitch; the line
    defaults (9x3 dilation, 5x5 closing) correspond to a 40 px pitch.
    Word-level blobs use half-size elements so inter-word gaps survive."""
    if word_level:
        dil_w = max(3, int(round(pitch_px * 5 / 40)))
        dil_h = max(1, int(round(pitch_px * 3 / 40)))
        close = 3
    else:
        dil_w = max(3, int(round(pitch_px * 9 / 40)))
        dil_h = max(1, int(round(pitch_px * 3 / 40)))
        close = max(3, int(round(pitch_px * 5 / 40)))
    return np.ones((dil_h, dil_w), bool), np.ones((close, close), bool)


def corners_to_blobs(corners: np.ndarray, frame_shape,
                     pitch_px: float = DEFAULT_PITCH_PX,
                     word_level: bool = False) -> np.ndarray:
    """Rasterize corners and aggregate into blobs (dilation then closing).

    word_level=True keeps words as separate blobs for focused-word
    extraction; the default aggregates whole lines for angle estimation.
    """
    h, w = frame_shape[:2]
    raster = np.zeros((h, w), dtype=bool)
    if len(corners):
        xs = np.clip(corners[:, 0].astype(int), 0, w - 1)
        ys = np.clip(corners[:, 1].astype(int), 0, h - 1)
        raster[ys, xs] = True
    dil, close = _morph_structures(pitch_px, word_level)
    # rectangular dilation/closing as separable max/min filters with the
    # padding of binary dilation (outside = background) and closing
    # (erosion does not bite at borders)
    blobs = ndimage.maximum_filter(raster, size=dil.shape, mode="constant", cval=0) > 0
    closed = ndimage.maximum_filter(blobs, size=close.shape, mode="constant", cval=0)
    blobs = ndimage.minimum_filter(closed, size=close.shape, mode="constant", cval=1) > 0
    return blobs


def estimate_block_angle(blobs: np.ndarray, seed: int = 0) -> float:
    """Angle of the longest line segment found on the blob raster; 0 when
    nothing qualifies."""
    segs = detect_line_segments(blobs, min_length=0.25 * blobs.shape[1], seed=seed)
    return segs[0].angle if segs else 0.0


def cluster_text_lines(corners: np.ndarray, frame_shape, *,
                       pitch_px: float = DEFAULT_PITCH_PX,
                       min_corners: int = MIN_CORNERS_PER_LINE,
                       blobs: np.ndarray | None = None) -> list[LineRegion]:
    """Group corners into per-text-line regions (top-to-bottom order)."""
    corners = np.asarray(corners, dtype=np.float64).reshape(-1, 2)
    if len(corners) == 0:
        return []

    h, w = frame_shape[:2]
    if blobs is None:
        blobs = corners_to_blobs(corners, frame_shape, pitch_px)
    angle = estimate_block_angle(blobs)

    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    rx, ry = rotate_coords(corners[:, 0], corners[:, 1], -angle, cx, cy)

    order = np.argsort(ry)
    gap = pitch_px / 2.0
    clusters: list[np.ndarray] = []
    start = 0
    ry_sorted = ry[order]
    for i in range(1, len(order) + 1):
        if i < len(order) and ry_sorted[i] - ry_sorted[i - 1] <= gap:
            continue
        clusters.append(order[start:i])
        start = i

    regions = []
    for cluster in clusters:
        if len(cluster) < min_corners:
            continue
        pts = corners[cluster]
        pts = pts[np.argsort(pts[:, 0])]
        bbox = Rect.from_points(pts[:, 0], pts[:, 1])
        regions.append((bbox.center[1], pts, bbox))

    regions.sort(key=lambda r: r[0])
    return [
        LineRegion(id=i, baseline_points=pts, bbox=bbox, angle=angle, corner_count=len(pts))
        for i, (_, pts, bbox) in enumerate(regions)
    ]
