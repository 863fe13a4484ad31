"""Focused-word extraction: the word on the line above the fingertip.

Connected components of the blob raster within the selected line are
scored by horizontal distance to the fingertip; the largest of the
nearest blobs seeds the word, any blob whose bounding box overlaps it is
merged in, and the merged box is cropped from the gray frame.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from optobraille.errors import NoLineAboveFinger
from optobraille.geometry import Rect
from optobraille.page.fingertip import FingertipEstimate
from optobraille.page.lines import LineRegion

NEAREST_TOL_PX = 2.0


@dataclass(frozen=True)
class WordCrop:
    gray_patch: np.ndarray
    bbox: Rect
    line_id: int


def select_line_above(lines: list[LineRegion], tip: FingertipEstimate) -> LineRegion:
    """The text line above and closest to the fingertip (vertical distance
    from the tip to the region's lower bbox edge)."""
    above = [ln for ln in lines if ln.bbox.y1 <= tip.y]
    if not above:
        raise NoLineAboveFinger(f"no line fully above y={tip.y:.0f}")
    return min(above, key=lambda ln: tip.y - ln.bbox.y1)


def _blob_boxes(blobs: np.ndarray, region: Rect) -> list[Rect]:
    labels, count = ndimage.label(blobs)
    boxes = []
    for sl in ndimage.find_objects(labels):
        if sl is None:
            continue
        box = Rect(float(sl[1].start), float(sl[0].start),
                   float(sl[1].stop - 1), float(sl[0].stop - 1))
        if box.intersects(region):
            boxes.append(box)
    return boxes


def _x_distance(box: Rect, x: float) -> float:
    if box.x0 <= x <= box.x1:
        return 0.0
    return min(abs(x - box.x0), abs(x - box.x1))


def extract_focused_word(lines: list[LineRegion], tip: FingertipEstimate,
                         gray: np.ndarray, blobs: np.ndarray) -> WordCrop:
    """Crop the focused word's gray patch; raises NoLineAboveFinger when
    no line region lies fully above the fingertip."""
    line = select_line_above(lines, tip)
    boxes = _blob_boxes(blobs, line.bbox)
    if not boxes:
        raise NoLineAboveFinger("selected line has no blobs")

    dists = [_x_distance(b, tip.x) for b in boxes]
    dmin = min(dists)
    near = [b for b, d in zip(boxes, dists) if d <= dmin + NEAREST_TOL_PX]
    # largest of the nearest blobs; ties broken by smaller x
    near.sort(key=lambda b: (-(b.width + 1) * (b.height + 1), b.x0))
    seed = near[0]

    merged = seed
    for b in boxes:
        if b.intersects(seed):
            merged = merged.union(b)

    h, w = gray.shape[:2]
    merged = merged.clip_to(w, h)
    x0, y0 = int(merged.x0), int(merged.y0)
    x1, y1 = int(merged.x1), int(merged.y1)
    patch = gray[y0:y1 + 1, x0:x1 + 1].copy()
    return WordCrop(gray_patch=patch, bbox=Rect(x0, y0, x1, y1), line_id=line.id)
