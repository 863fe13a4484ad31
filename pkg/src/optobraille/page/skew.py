"""Document skew estimation and correction.

The skew angle comes from baseline-aligned Hough segments over a random
subset of ink points (the probabilistic shortcut: only a fraction of the
candidate points vote). Deskewing rotates the frame content by the
negative angle about the image center.
"""

from __future__ import annotations

import numpy as np

from optobraille.errors import NoLinesFound
from optobraille.frame import Frame
from optobraille.imageops import otsu_threshold, rotate_image
from optobraille.page.segments import detect_line_segments


def ink_mask(gray: np.ndarray) -> np.ndarray:
    """Dark-side Otsu split of a grayscale page (True = ink)."""
    t = otsu_threshold(gray)
    mask = gray <= t
    # a near-blank page splits noise; require real contrast
    dark = gray[mask]
    light = gray[~mask] if (~mask).any() else np.array([0.0])
    if not mask.any() or not (~mask).any() or float(light.mean() - dark.mean()) < 0.15:
        return np.zeros_like(mask)
    return mask


def detect_skew(frame: Frame, *, sample_fraction: float = 0.2,
                min_length_frac: float = 0.3, seed: int = 0) -> float:
    """Dominant text-direction angle in radians, in (-pi/2, pi/2].

    Raises NoLinesFound when fewer than two qualifying segments exist.
    """
    gray = frame.gray().data
    mask = ink_mask(gray)
    segs = detect_line_segments(
        mask,
        sample_fraction=sample_fraction,
        min_length=min_length_frac * mask.shape[1],
        seed=seed,
    )
    if len(segs) < 2:
        raise NoLinesFound(f"only {len(segs)} qualifying segments")
    # aggregate only segments agreeing with the longest one; short stray
    # alignments across structures otherwise bias the average
    lead = segs[0]
    kept = [s for s in segs
            if s.length >= 0.6 * lead.length and abs(s.angle - lead.angle) < np.deg2rad(1.0)]
    weights = np.array([s.length * s.support for s in kept])
    angles = np.array([s.angle for s in kept])
    return float(np.average(angles, weights=weights))


def deskew(frame: Frame, angle: float, fill: float = 1.0) -> Frame:
    """Rotate the frame content by -angle about the image center."""
    if not abs(angle) < np.pi / 2:
        raise ValueError("deskew angle must satisfy |angle| < pi/2")
    if angle == 0.0:
        return frame
    return Frame(rotate_image(frame.data, -angle, fill=fill), frame.t)
