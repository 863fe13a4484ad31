"""Discrete movement commands derived from the signed strength.

A deadband suppresses jitter around the baseline; once a directional
command is issued it persists until |s| falls below half the deadband
(hysteresis), so Up and Down never alternate without re-crossing the
quiet zone. Reaching the end zone of a line overrides everything with
NewLine; a LineStart marker is emitted when the finger arrives at the
beginning of the next line after a NewLine.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum


class CommandKind(str, Enum):
    UP = "Up"
    DOWN = "Down"
    NONE = "None"
    NEW_LINE = "NewLine"
    LINE_START = "LineStart"


class LinePosition(str, Enum):
    BEGIN = "Begin"
    MIDDLE = "Middle"
    END = "End"


@dataclass(frozen=True)
class DeadbandConfig:
    epsilon: float = 0.15
    end_zone_fraction: float = 0.08

    def __post_init__(self):
        if not 0 <= self.epsilon < 1:
            raise ValueError("epsilon must be in [0, 1)")
        if not 0 < self.end_zone_fraction < 0.5:
            raise ValueError("end_zone_fraction must be in (0, 0.5)")


@dataclass(frozen=True)
class FeedbackCommand:
    kind: CommandKind
    strength: float
    timestamp: float = 0.0

    def __post_init__(self):
        if self.kind in (CommandKind.NONE, CommandKind.NEW_LINE, CommandKind.LINE_START):
            if self.strength != 0.0:
                raise ValueError(f"{self.kind.value} carries no strength")
        elif not 0 < self.strength <= 1.0:
            raise ValueError("directional strength must be in (0, 1]")


def classify_line_position(tip, line, cfg: DeadbandConfig) -> LinePosition:
    """Begin/Middle/End from the tip's x against the line's end zones."""
    width = line.bbox.width
    if width <= 0:
        raise ValueError("line region has zero width")
    zone = cfg.end_zone_fraction * width
    tip_x = tip.x if hasattr(tip, "x") else float(tip)
    if tip_x <= line.bbox.x0 + zone:
        return LinePosition.BEGIN
    if tip_x >= line.bbox.x1 - zone:
        return LinePosition.END
    return LinePosition.MIDDLE


def command_from_state(s: float, position: LinePosition,
                       cfg: DeadbandConfig, timestamp: float = 0.0) -> FeedbackCommand:
    """Stateless command mapping (no hysteresis): deadband, sign rule,
    end-of-line override."""
    if abs(s) > 1.0:
        raise ValueError("|s| must be <= 1")
    if position == LinePosition.END:
        return FeedbackCommand(CommandKind.NEW_LINE, 0.0, timestamp)
    if abs(s) <= cfg.epsilon:
        return FeedbackCommand(CommandKind.NONE, 0.0, timestamp)
    kind = CommandKind.DOWN if s > 0 else CommandKind.UP
    return FeedbackCommand(kind, abs(s), timestamp)


class CommandEvaluator:
    """Per-session command state machine with hysteresis.

    One evaluator per session; instances are independent and confine all
    mutable state.
    """

    def __init__(self, cfg: DeadbandConfig | None = None):
        self.cfg = cfg or DeadbandConfig()
        self._active: CommandKind = CommandKind.NONE
        self._newline_pending = False

    def reset(self):
        self._active = CommandKind.NONE
        self._newline_pending = False

    def update(self, s: float, position: LinePosition, timestamp: float = 0.0) -> FeedbackCommand:
        if abs(s) > 1.0:
            raise ValueError("|s| must be <= 1")
        cfg = self.cfg

        if position == LinePosition.END:
            self._active = CommandKind.NONE
            self._newline_pending = True
            return FeedbackCommand(CommandKind.NEW_LINE, 0.0, timestamp)

        if self._newline_pending and position == LinePosition.BEGIN:
            self._newline_pending = False
            return FeedbackCommand(CommandKind.LINE_START, 0.0, timestamp)

        if self._active in (CommandKind.UP, CommandKind.DOWN):
            # an issued command persists until |s| falls below epsilon/2
            if abs(s) < cfg.epsilon / 2.0:
                self._active = CommandKind.NONE
                return FeedbackCommand(CommandKind.NONE, 0.0, timestamp)
            # direction flips only once |s| re-crosses the full deadband
            desired = CommandKind.DOWN if s > 0 else CommandKind.UP
            if desired != self._active and abs(s) > cfg.epsilon:
                self._active = desired
            return FeedbackCommand(self._active, min(1.0, abs(s)), timestamp)

        if abs(s) <= cfg.epsilon:
            return FeedbackCommand(CommandKind.NONE, 0.0, timestamp)
        self._active = CommandKind.DOWN if s > 0 else CommandKind.UP
        return FeedbackCommand(self._active, abs(s), timestamp)
