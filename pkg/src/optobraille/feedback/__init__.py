"""Directional feedback: baseline geometry, signed strength, commands."""

from optobraille.feedback.law import (
    BaselineGeometry,
    baseline_between,
    baseline_single_line,
    compute_baseline,
    feedback_strength,
    geometry_from_lines,
)
from optobraille.feedback.commands import (
    CommandEvaluator,
    CommandKind,
    DeadbandConfig,
    FeedbackCommand,
    LinePosition,
    classify_line_position,
    command_from_state,
)

__all__ = [
    "BaselineGeometry",
    "compute_baseline",
    "baseline_between",
    "baseline_single_line",
    "feedback_strength",
    "geometry_from_lines",
    "CommandEvaluator",
    "CommandKind",
    "DeadbandConfig",
    "FeedbackCommand",
    "LinePosition",
    "classify_line_position",
    "command_from_state",
]
