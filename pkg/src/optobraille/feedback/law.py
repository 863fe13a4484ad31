"""Baseline geometry and the signed feedback-strength ratio.

The baseline splits the gap between two adjacent text lines equally. With
d1 the distance from the baseline to the upper line, d2 to the lower
line, and d3 to the fingertip:

    s = (-1)^k * d3 / (d3 + min(d1, d2)),   k = 0 above the baseline

Positive s tells the user to move the finger down, negative up; |s| is in
[0, 1] and grows with the fingertip's departure from the baseline. The
ratio is scale-invariant, so it works identically in pixels or
millimeters.

Image coordinates grow downward: "above" means smaller y.
"""

from __future__ import annotations

from dataclasses import dataclass

from optobraille.errors import DegenerateGeometry, OverlappingLines
from optobraille.page.lines import LineRegion


@dataclass(frozen=True)
class BaselineGeometry:
    d1: float  # baseline to upper text line
    d2: float  # baseline to lower text line
    d3: float  # baseline to fingertip
    above_baseline: bool

    def __post_init__(self):
        for d in (self.d1, self.d2, self.d3):
            if not (d >= 0 and d == d and d != float("inf")):
                raise ValueError("distances must be finite and >= 0")


def baseline_between(upper: LineRegion, lower: LineRegion) -> float:
    """Baseline y between two stacked line regions (midpoint of the gap,
    so d1 = d2 by construction)."""
    if upper.bbox.y1 >= lower.bbox.y0:
        raise OverlappingLines(
            f"upper bbox ends at y={upper.bbox.y1}, lower starts at y={lower.bbox.y0}")
    return 0.5 * (upper.bbox.y1 + lower.bbox.y0)


def baseline_single_line(line: LineRegion, nominal_pitch: float) -> float:
    """Fallback when only one line is visible: half a pitch below it."""
    return line.bbox.y1 + nominal_pitch / 2.0


def compute_baseline(upper: LineRegion, lower: LineRegion | None,
                     nominal_pitch: float | None = None) -> float:
    if lower is not None:
        return baseline_between(upper, lower)
    if nominal_pitch is None:
        raise ValueError("single-line baseline needs the nominal pitch")
    return baseline_single_line(upper, nominal_pitch)


def geometry_from_lines(upper: LineRegion, lower: LineRegion | None,
                        tip_y: float, nominal_pitch: float | None = None) -> BaselineGeometry:
    """Assemble the three distances for a fingertip at tip_y."""
    baseline_y = compute_baseline(upper, lower, nominal_pitch)
    d1 = baseline_y - upper.bbox.y1
    if lower is not None:
        d2 = lower.bbox.y0 - baseline_y
    else:
        d2 = d1
    return BaselineGeometry(d1=max(0.0, d1), d2=max(0.0, d2),
                            d3=abs(tip_y - baseline_y),
                            above_baseline=tip_y < baseline_y)


def feedback_strength(g: BaselineGeometry) -> float:
    """Signed strength in [-1, 1]; positive means move down."""
    denom = g.d3 + min(g.d1, g.d2)
    if denom <= 0:
        raise DegenerateGeometry("d3 + min(d1, d2) = 0")
    sign = 1.0 if g.above_baseline else -1.0
    return sign * g.d3 / denom
