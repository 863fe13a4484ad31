import numpy as np
import pytest

from optobraille.errors import DegenerateGeometry, OverlappingLines
from optobraille.feedback import (
    BaselineGeometry,
    CommandEvaluator,
    CommandKind,
    DeadbandConfig,
    FeedbackCommand,
    LinePosition,
    baseline_between,
    baseline_single_line,
    classify_line_position,
    command_from_state,
    feedback_strength,
    geometry_from_lines,
)
from optobraille.geometry import Rect
from optobraille.page.lines import LineRegion


def region(y0, y1, x0=0.0, x1=400.0):
    return LineRegion(id=0, baseline_points=np.array([[x0, y0], [x1, y1]]),
                      bbox=Rect(x0, y0, x1, y1), angle=0.0, corner_count=10)


class Tip:
    def __init__(self, x, y):
        self.x = x
        self.y = y


# -- baseline ----------------------------------------------------------------

def test_midpoint_baseline():
    upper = region(60, 100)
    lower = region(170, 210)
    y = baseline_between(upper, lower)
    assert y == 135.0
    g = geometry_from_lines(upper, lower, tip_y=135.0)
    assert g.d1 == g.d2 == 35.0
    assert g.d3 == 0.0


def test_single_line_fallback():
    line = region(60, 100)
    assert baseline_single_line(line, nominal_pitch=100.0) == 150.0


def test_overlapping_lines_raise():
    with pytest.raises(OverlappingLines):
        baseline_between(region(60, 120), region(110, 160))


def test_paper_page_geometry_distances():
    # 3 mm lines at 10 mm pitch leave a 7 mm gap: d1 = d2 = 3.5 mm.
    # In pixel units at 8 px/mm: lines 24 px tall, gap 56 px.
    upper = region(100, 124)
    lower = region(180, 204)
    y = baseline_between(upper, lower)
    g = geometry_from_lines(upper, lower, tip_y=y)
    assert g.d1 == pytest.approx(3.5 * 8)
    assert g.d2 == pytest.approx(3.5 * 8)


# -- strength law ---------------------------------------------------------------

def test_zero_on_baseline():
    g = BaselineGeometry(d1=28.0, d2=28.0, d3=0.0, above_baseline=True)
    assert feedback_strength(g) == 0.0


def test_half_when_d3_equals_min():
    g = BaselineGeometry(d1=28.0, d2=30.0, d3=28.0, above_baseline=True)
    assert feedback_strength(g) == pytest.approx(0.5)


def test_paper_geometry_example_value():
    # d1 = d2 = 3.5 mm, d3 = 2 mm, above: s = 2 / 5.5
    g = BaselineGeometry(d1=3.5, d2=3.5, d3=2.0, above_baseline=True)
    assert feedback_strength(g) == pytest.approx(2.0 / 5.5)
    assert feedback_strength(g) == pytest.approx(0.363636, abs=1e-6)


def test_sign_follows_side():
    above = BaselineGeometry(3.5, 3.5, 2.0, above_baseline=True)
    below = BaselineGeometry(3.5, 3.5, 2.0, above_baseline=False)
    assert feedback_strength(above) > 0  # move down
    assert feedback_strength(below) < 0  # move up


def test_degenerate_geometry_raises():
    with pytest.raises(DegenerateGeometry):
        feedback_strength(BaselineGeometry(0.0, 5.0, 0.0, above_baseline=True))


def test_strength_property_suite():
    # |s| <= 1, sign rule, monotone in d3, scale invariance, s=0 iff d3=0
    rng = np.random.default_rng(42)
    for _ in range(10_000):
        d1, d2 = rng.uniform(0.01, 50.0, size=2)
        d3 = rng.uniform(0.0, 50.0)
        above = bool(rng.integers(2))
        g = BaselineGeometry(d1, d2, d3, above)
        s = feedback_strength(g)
        assert abs(s) <= 1.0
        if d3 == 0:
            assert s == 0.0
        else:
            assert (s > 0) == above
        # scale invariance
        c = rng.uniform(0.1, 10.0)
        s_scaled = feedback_strength(BaselineGeometry(c * d1, c * d2, c * d3, above))
        assert s_scaled == pytest.approx(s, abs=1e-12)
        # strictly increasing in d3
        s_more = feedback_strength(BaselineGeometry(d1, d2, d3 + 1.0, above))
        assert abs(s_more) > abs(s)


# -- position classification -----------------------------------------------------

def test_positions():
    line = region(60, 100, x0=50, x1=450)
    cfg = DeadbandConfig()
    assert classify_line_position(Tip(50, 0), line, cfg) == LinePosition.BEGIN
    assert classify_line_position(Tip(250, 0), line, cfg) == LinePosition.MIDDLE
    assert classify_line_position(Tip(449, 0), line, cfg) == LinePosition.END
    # exactly at the 8% threshold from the right edge
    assert classify_line_position(Tip(450 - 0.08 * 400, 0), line, cfg) == LinePosition.END


# -- command mapping --------------------------------------------------------------

def test_deadband_suppresses_small_s():
    cfg = DeadbandConfig(epsilon=0.15)
    cmd = command_from_state(0.05, LinePosition.MIDDLE, cfg)
    assert cmd.kind == CommandKind.NONE
    assert cmd.strength == 0.0


def test_sign_rule_down():
    cmd = command_from_state(0.36, LinePosition.MIDDLE, DeadbandConfig())
    assert cmd.kind == CommandKind.DOWN
    assert cmd.strength == pytest.approx(0.36)


def test_end_overrides_to_newline():
    cmd = command_from_state(-0.8, LinePosition.END, DeadbandConfig())
    assert cmd.kind == CommandKind.NEW_LINE
    assert cmd.strength == 0.0


def test_command_strength_invariant():
    with pytest.raises(ValueError):
        FeedbackCommand(CommandKind.NONE, 0.5)
    with pytest.raises(ValueError):
        FeedbackCommand(CommandKind.UP, 0.0)
    with pytest.raises(ValueError):
        FeedbackCommand(CommandKind.NEW_LINE, 0.2)


def test_command_total_on_valid_range():
    cfg = DeadbandConfig()
    for s in np.linspace(-1, 1, 201):
        cmd = command_from_state(float(s), LinePosition.MIDDLE, cfg)
        assert cmd.kind in (CommandKind.UP, CommandKind.DOWN, CommandKind.NONE)
    with pytest.raises(ValueError):
        command_from_state(1.2, LinePosition.MIDDLE, cfg)


# -- hysteresis ---------------------------------------------------------------------

def test_hysteresis_holds_command_inside_deadband():
    ev = CommandEvaluator(DeadbandConfig(epsilon=0.15))
    assert ev.update(0.4, LinePosition.MIDDLE).kind == CommandKind.DOWN
    # falls inside the deadband but above epsilon/2: command persists
    assert ev.update(0.10, LinePosition.MIDDLE).kind == CommandKind.DOWN
    # below epsilon/2: released
    assert ev.update(0.05, LinePosition.MIDDLE).kind == CommandKind.NONE
    # small values stay quiet
    assert ev.update(0.10, LinePosition.MIDDLE).kind == CommandKind.NONE


def test_no_alternation_without_deadband_crossing():
    ev = CommandEvaluator(DeadbandConfig(epsilon=0.15))
    kinds = []
    for s in [0.4, 0.12, 0.09, -0.12, -0.09, 0.12]:
        kinds.append(ev.update(s, LinePosition.MIDDLE).kind)
    # oscillation within the band never produces Up after the initial Down
    assert CommandKind.UP not in kinds


def test_newline_then_linestart():
    ev = CommandEvaluator(DeadbandConfig())
    assert ev.update(0.2, LinePosition.END).kind == CommandKind.NEW_LINE
    assert ev.update(0.0, LinePosition.BEGIN).kind == CommandKind.LINE_START
    # only once per NewLine
    assert ev.update(0.0, LinePosition.BEGIN).kind == CommandKind.NONE


def test_evaluators_independent():
    a = CommandEvaluator()
    b = CommandEvaluator()
    a.update(0.5, LinePosition.MIDDLE)
    assert b.update(0.05, LinePosition.MIDDLE).kind == CommandKind.NONE


def test_deadband_config_validation():
    with pytest.raises(ValueError):
        DeadbandConfig(epsilon=1.0)
    with pytest.raises(ValueError):
        DeadbandConfig(end_zone_fraction=0.6)
