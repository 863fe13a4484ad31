"""Synthetic page rendering for the closed-loop testbed.

The default layout mirrors the tracking experiments' material: 3 mm tall
text lines at a 10 mm center-to-center pitch on a US-Letter page. Glyphs
come from the embedded bitmap font, scaled so the cap height equals the
line height.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from optobraille import font
from optobraille.errors import TextOverflow
from optobraille.frame import Frame

DEFAULT_TEXT = [
    "the quick brown fox jumps over the lazy dog near the river each day",
    "reading with a fingertip takes steady lines and patient slow motion",
    "braille dots rise under the skin while the camera reads every word",
    "a small wedge of blue resin marks the finger for the vision system",
    "every line ends with a cue to move down and start reading once more",
]


@dataclass(frozen=True)
class PageLayout:
    line_height_mm: float = 3.0
    line_pitch_mm: float = 10.0
    font_size_pt: float = 14.0      # nominal print size; rendering is driven by line_height_mm
    page_width_mm: float = 215.9    # US Letter
    page_height_mm: float = 279.4
    margin_mm: float = 22.95        # leaves a 170 mm printable width
    top_margin_mm: float = 40.0
    text: tuple[str, ...] = field(default_factory=lambda: tuple(DEFAULT_TEXT))

    def __post_init__(self):
        if self.line_pitch_mm <= self.line_height_mm:
            raise ValueError("line pitch must exceed line height")
        if min(self.line_height_mm, self.page_width_mm, self.page_height_mm) <= 0:
            raise ValueError("dimensions must be positive")
        object.__setattr__(self, "text", tuple(self.text))

    @property
    def printable_width_mm(self) -> float:
        return self.page_width_mm - 2 * self.margin_mm

    @property
    def char_advance_mm(self) -> float:
        """Horizontal advance per character: 5/6 of the line height (a
        5-column glyph cell plus a 1-column gap at 7 rows of cap)."""
        return self.line_height_mm * 5.0 / 6.0

    def line_center_y_mm(self, index: int) -> float:
        return self.top_margin_mm + index * self.line_pitch_mm

    def gap_baseline_y_mm(self, index: int) -> float:
        """Midline of the gap below text line `index`: the path a finger
        tracks while reading that line."""
        return self.line_center_y_mm(index) + self.line_pitch_mm / 2.0

    def line_x_span_mm(self, index: int = 0) -> tuple[float, float]:
        """Start and end of the rendered text on line `index`; falls back
        to the printable width when the line is empty."""
        if 0 <= index < len(self.text) and self.text[index]:
            end = self.margin_mm + len(self.text[index]) * self.char_advance_mm
            return (self.margin_mm, min(end, self.page_width_mm - self.margin_mm))
        return (self.margin_mm, self.margin_mm + self.printable_width_mm)


def render_page(layout: PageLayout, dpmm: float) -> Frame:
    """Render the page at `dpmm` dots per millimeter (white 1.0, ink 0.0).

    Raises TextOverflow when a line exceeds the printable width.
    """
    if dpmm <= 0:
        raise ValueError("dpmm must be positive")
    height = int(round(layout.page_height_mm * dpmm))
    width = int(round(layout.page_width_mm * dpmm))
    page = np.ones((height, width))

    cap_px = int(round(layout.line_height_mm * dpmm))
    adv_px = layout.char_advance_mm * dpmm
    x0 = layout.margin_mm * dpmm
    max_x = int(round((layout.page_width_mm - layout.margin_mm) * dpmm))

    for i, line in enumerate(layout.text):
        if not line:
            continue
        if int(round(x0 + adv_px * len(line))) > max_x:
            raise TextOverflow(f"line {i} ({len(line)} chars) exceeds printable width")
        top = int(round((layout.line_center_y_mm(i) - layout.line_height_mm / 2.0) * dpmm))
        # glyph positions round per character so the average advance stays
        # exact in millimeters at any dpmm
        for j, ch in enumerate(line):
            glyph = font.scaled_glyph(ch, cap_px)
            gx = int(round(x0 + j * adv_px))
            if top < 0 or top + glyph.shape[0] > height:
                raise TextOverflow(f"line {i} falls outside the page")
            region = page[top: top + glyph.shape[0], gx: gx + glyph.shape[1]]
            region[glyph[:, : region.shape[1]]] = 0.0
    return Frame(page)
