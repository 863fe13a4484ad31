"""Fingertip localization from the blue wearable device.

The device color separates from paper and ink along the blue-yellow (b*)
axis of L*a*b*, so an Otsu split of the b* channel isolates it; the
fingertip is the topmost contour pixel of the largest blue component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

from optobraille.errors import NoDeviceFound
from optobraille.frame import Frame
from optobraille.imageops import otsu_threshold, rgb_to_lab

# minimum component area, specified at 640x480 and scaled by actual area
MIN_DEVICE_AREA = 200
REFERENCE_PIXELS = 640 * 480
# minimum b* separation between the blue class and the rest; below this
# the frame has no blue object and Otsu is splitting noise
MIN_B_SEPARATION = 8.0


@dataclass(frozen=True)
class FingertipEstimate:
    position: tuple[float, float]   # (x, y) pixels
    device_mask: np.ndarray         # bool raster
    confidence: float               # in (0, 1]

    @property
    def x(self) -> float:
        return self.position[0]

    @property
    def y(self) -> float:
        return self.position[1]


def detect_fingertip(rgb: Frame, *, min_area: int | None = None,
                     lab: np.ndarray | None = None) -> FingertipEstimate:
    """Locate the blue device tip; raises NoDeviceFound when absent.

    `lab` may carry a precomputed L*a*b* array for the frame.
    """
    if not rgb.is_color:
        raise ValueError("fingertip detection needs an RGB frame")
    if lab is None:
        lab = rgb_to_lab(rgb.data)
    b = lab[..., 2]

    if min_area is None:
        min_area = max(20, int(MIN_DEVICE_AREA * b.size / REFERENCE_PIXELS))

    t = otsu_threshold(b)
    low = b <= t
    if not low.any() or low.all():
        raise NoDeviceFound("b* channel is uniform")
    if float(b[~low].mean() - b[low].mean()) < MIN_B_SEPARATION:
        raise NoDeviceFound("no blue-separated object")

    labels, count = ndimage.label(low, structure=np.ones((3, 3), dtype=int))
    if count == 0:
        raise NoDeviceFound("no components on the blue side")
    sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, count + 1))
    best = int(np.argmax(sizes)) + 1
    area = float(sizes[best - 1])
    if area < min_area:
        raise NoDeviceFound(f"largest blue component {area:.0f}px < {min_area}px")

    mask = labels == best
    ys, xs = np.nonzero(mask)
    top = ys.min()
    x_at_top = xs[ys == top].min()  # topmost row, ties broken by smallest x
    confidence = min(1.0, area / (4.0 * min_area))
    return FingertipEstimate(position=(float(x_at_top), float(top)),
                             device_mask=mask, confidence=confidence)


def segment_page(rgb: Frame, device_mask: np.ndarray | None = None,
                 lab: np.ndarray | None = None) -> np.ndarray:
    """Page-surface mask: the bright L* region (hole-filled), minus the
    device. Used to confine corner detection to the page."""
    if lab is not None:
        lightness = lab[..., 0]
    elif not rgb.is_color:
        lightness = rgb.data * 100.0
    else:
        lightness = rgb_to_lab(rgb.data)[..., 0]
    t = otsu_threshold(lightness)
    bright = lightness > t
    # low-contrast scene: the whole view is page surface
    if not bright.any() or not (~bright).any() or \
            float(lightness[bright].mean() - lightness[~bright].mean()) < 20.0:
        mask = np.ones_like(bright)
    else:
        labels, count = ndimage.label(bright)
        sizes = ndimage.sum_labels(np.ones_like(labels), labels, index=np.arange(1, count + 1))
        mask = labels == (int(np.argmax(sizes)) + 1)
        mask = ndimage.binary_fill_holes(mask)
    if device_mask is not None:
        # margin covers the corner detector's ring radius so device-edge
        # responses cannot masquerade as text corners
        grown = ndimage.maximum_filter(device_mask, size=11)
        mask = mask & ~grown
    return mask
