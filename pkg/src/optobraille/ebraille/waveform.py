"""Stimulation waveform scheduling and constant-current regulation.

Dots pulse at the configured frequency and duty cycle. Command (side)
dots additionally follow a burst pattern that encodes command strength as
repetition: ceil(strength * 4) active periods followed by one silent
period. Strength maps to repetition rather than amplitude because the
voltage is pinned at each user's detection threshold; zero-strength
commands that still carry side dots (line changes) pulse at the minimum
one-on/one-off rate.

The regulation loop is a proportional controller on voltage against a
measured current, clamped to the safe 60-100 V span.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

from optobraille.ebraille.frames import CENTER_MASK, SIDE_MASK, ElectrodeFrame, command_patterns

VOLTAGE_MIN = 60.0
VOLTAGE_MAX = 100.0


@dataclass(frozen=True)
class StimulationParams:
    frequency_hz: float = 30.0
    duty_cycle: float = 0.10
    target_current_ua: float = 30.0
    voltage_v: float = 80.0
    kp_v_per_ua: float = 0.5

    def __post_init__(self):
        if not 0 < self.duty_cycle < 1:
            raise ValueError("duty cycle must be in (0, 1)")
        if self.frequency_hz <= 0:
            raise ValueError("frequency must be positive")
        if not VOLTAGE_MIN <= self.voltage_v <= VOLTAGE_MAX:
            raise ValueError(f"voltage must lie in [{VOLTAGE_MIN}, {VOLTAGE_MAX}] V")


@dataclass(frozen=True)
class WaveformEvent:
    t_on: float
    t_off: float
    active_dots: int  # 16-bit mask


@dataclass(frozen=True)
class WaveformSchedule:
    events: tuple[WaveformEvent, ...]

    def per_dot_events(self) -> dict[int, list[WaveformEvent]]:
        out: dict[int, list[WaveformEvent]] = {}
        for ev in self.events:
            for i in range(16):
                if ev.active_dots >> i & 1:
                    out.setdefault(i, []).append(ev)
        return out

    def duration(self) -> float:
        return max((ev.t_off for ev in self.events), default=0.0)

    def shifted(self, offset: float) -> "WaveformSchedule":
        return WaveformSchedule(tuple(
            WaveformEvent(ev.t_on + offset, ev.t_off + offset, ev.active_dots)
            for ev in self.events))


def schedule_stimulation(frame: ElectrodeFrame, params: StimulationParams,
                         duration: float, strength: float = 0.0) -> WaveformSchedule:
    """Periodic on/off events for all active dots over `duration` seconds.

    Center dots fire every period; side dots follow the strength burst
    pattern.
    """
    if duration <= 0:
        raise ValueError("duration must be positive")
    if not 0 <= strength <= 1:
        raise ValueError("strength must be in [0, 1]")

    period = 1.0 / params.frequency_hz
    on_time = params.duty_cycle * period
    n_periods = int(math.floor(duration / period + 1e-9))

    center = frame.dots16 & CENTER_MASK
    side = frame.dots16 & SIDE_MASK
    burst_on = max(1, math.ceil(strength * 4)) if side else 0
    burst_len = burst_on + 1  # one silent period closes each burst

    events = []
    for k in range(n_periods):
        mask = center
        if side and (k % burst_len) < burst_on:
            mask |= side
        if mask:
            t0 = k * period
            events.append(WaveformEvent(t0, t0 + on_time, mask))
    return WaveformSchedule(tuple(events))


def training_sequence(count: int, params: StimulationParams | None = None,
                      cue_duration: float = 0.5, gap: float = 0.5) -> WaveformSchedule:
    """Alternating Up/Down cue schedule: `count` pairs of cues, each cue
    stimulated for cue_duration seconds and separated by `gap` seconds."""
    if count < 0:
        raise ValueError("count must be >= 0")
    params = params or StimulationParams()
    patterns = command_patterns()
    events: list[WaveformEvent] = []
    t = 0.0
    for _ in range(count):
        for kind in ("Up", "Down"):
            frame = ElectrodeFrame(patterns[kind] & SIDE_MASK)
            cue = schedule_stimulation(frame, params, cue_duration, strength=1.0)
            events.extend(cue.shifted(t).events)
            t += cue_duration + gap
    return WaveformSchedule(tuple(events))


def regulate_current(measured_ua: float, params: StimulationParams) -> StimulationParams:
    """One proportional regulation step; voltage clamps to the safe span."""
    if measured_ua < 0:
        raise ValueError("measured current must be >= 0")
    error = params.target_current_ua - measured_ua
    voltage = params.voltage_v + params.kp_v_per_ua * error
    voltage = min(VOLTAGE_MAX, max(VOLTAGE_MIN, voltage))
    return replace(params, voltage_v=voltage)


def simulate_regulation(load_mohm: float, params: StimulationParams,
                        max_steps: int = 50):
    """Drive the regulation loop against an Ohmic skin load (V / R).

    Returns (final params, current history in microamps).
    """
    history = []
    for _ in range(max_steps):
        measured = params.voltage_v / load_mohm  # V / MOhm = uA
        history.append(measured)
        params = regulate_current(measured, params)
    return params, history


def export_waveform_csv(schedule: WaveformSchedule, path) -> None:
    """CSV of (t, dotIndex, state) transitions, microsecond resolution."""
    rows = []
    for ev in schedule.events:
        for i in range(16):
            if ev.active_dots >> i & 1:
                rows.append((ev.t_on, i, 1))
                rows.append((ev.t_off, i, 0))
    rows.sort(key=lambda r: (r[0], r[1], -r[2]))
    with open(path, "w") as fh:
        fh.write("t,dotIndex,state\n")
        for t, dot, state in rows:
            fh.write(f"{t:.6f},{dot},{state}\n")
