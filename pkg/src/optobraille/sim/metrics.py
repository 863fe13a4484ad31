"""Tracking metrics derived from trajectory and command logs.

Offsets are vertical distances from the tracked line's center path;
envelopes are the pointwise extremes across runs on a common x grid (the
combined best/worst excursions, which matter more than the average since
opposite drifts cancel there). Reaction time is measured from command
onset to the first opposing y-motion in the log; compliance duration from
onset to the command clearing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from optobraille.sim.experiment import TrajectoryLog

DIRECTIONAL = ("Up", "Down")


@dataclass
class MetricsReport:
    mean_offset_mm: float
    std_offset_mm: float
    containment_2mm_fraction: float
    max_envelope_mm: np.ndarray      # per x-bin, signed upper extreme
    min_envelope_mm: np.ndarray      # per x-bin, signed lower extreme
    envelope_x_mm: np.ndarray
    peak_excursion_mm: float         # max |offset| anywhere
    mean_end_drift_mm: float         # mean |offset| at end of line
    avg_speed_mm_per_s: float
    per_run_speed_mm_per_s: list[float]
    reaction_times_s: list[float]
    compliance_durations_s: list[float]
    sample_count: int

    def as_dict(self) -> dict:
        return {
            "meanOffsetMm": self.mean_offset_mm,
            "stdOffsetMm": self.std_offset_mm,
            "containment2mmFraction": self.containment_2mm_fraction,
            "maxEnvelopeMm": self.max_envelope_mm.tolist(),
            "minEnvelopeMm": self.min_envelope_mm.tolist(),
            "envelopeXMm": self.envelope_x_mm.tolist(),
            "peakExcursionMm": self.peak_excursion_mm,
            "meanEndDriftMm": self.mean_end_drift_mm,
            "avgSpeedMmPerS": self.avg_speed_mm_per_s,
            "perRunSpeedMmPerS": self.per_run_speed_mm_per_s,
            "reactionTimesS": self.reaction_times_s,
            "complianceDurationsS": self.compliance_durations_s,
            "sampleCount": self.sample_count,
        }


def _offsets(log: TrajectoryLog) -> np.ndarray:
    return log.y_mm - log.metadata["line_center_y_mm"]


def reaction_times(log: TrajectoryLog, velocity_window_s: float = 0.3,
                   min_velocity_mm_s: float = 0.4) -> list[float]:
    """Command onset -> first sustained y-motion in the commanded
    direction, measured from the trajectory alone."""
    t = log.t
    y = log.y_mm
    if len(t) < 3:
        return []
    out = []
    for i, ev in enumerate(log.commands):
        if ev.kind not in DIRECTIONAL:
            continue
        prev_kind = log.commands[i - 1].kind if i > 0 else "None"
        if prev_kind == ev.kind:
            continue
        direction = 1.0 if ev.kind == "Down" else -1.0
        clear_t = next((e.t for e in log.commands[i + 1:] if e.kind != ev.kind), t[-1])
        sel = (t >= ev.t) & (t <= clear_t + 1.0)
        ts, ys = t[sel], y[sel]
        if len(ts) < 3:
            continue
        dt = np.gradient(ts)
        vy = np.gradient(ys) / np.where(dt > 0, dt, 1.0)
        win = max(1, int(round(velocity_window_s / max(np.median(dt), 1e-6))))
        smooth = np.convolve(vy, np.ones(win) / win, mode="same")
        hits = np.nonzero(direction * smooth >= min_velocity_mm_s)[0]
        if len(hits):
            out.append(float(ts[hits[0]] - ev.t))
    return out


def compliance_durations(log: TrajectoryLog) -> list[float]:
    """Command onset -> command clear, from the command log."""
    out = []
    events = log.commands
    for i, ev in enumerate(events):
        if ev.kind not in DIRECTIONAL:
            continue
        prev_kind = events[i - 1].kind if i > 0 else "None"
        if prev_kind == ev.kind:
            continue
        clear = next((e.t for e in events[i + 1:] if e.kind != ev.kind), None)
        if clear is not None:
            out.append(float(clear - ev.t))
    return out


def compute_metrics(logs: list[TrajectoryLog], envelope_bin_mm: float = 1.0) -> MetricsReport:
    if not logs:
        raise ValueError("compute_metrics needs at least one log")

    all_offsets = np.concatenate([_offsets(log) for log in logs])
    x0, x1 = logs[0].metadata["line_span_mm"]
    bins = np.arange(x0, x1 + envelope_bin_mm, envelope_bin_mm)
    max_env = np.full(len(bins) - 1, -np.inf)
    min_env = np.full(len(bins) - 1, np.inf)
    speeds = []
    end_drifts = []
    reactions: list[float] = []
    compliances: list[float] = []

    for log in logs:
        off = _offsets(log)
        xs = log.x_mm
        idx = np.clip(np.digitize(xs, bins) - 1, 0, len(bins) - 2)
        np.maximum.at(max_env, idx, off)
        np.minimum.at(min_env, idx, off)
        duration = float(log.t[-1] - log.t[0])
        travelled = float(xs[-1] - xs[0])
        if duration > 0:
            speeds.append(travelled / duration)
        end_drifts.append(abs(float(off[-1])))
        reactions.extend(reaction_times(log))
        compliances.extend(compliance_durations(log))

    observed = np.isfinite(max_env) & np.isfinite(min_env)
    centers = 0.5 * (bins[:-1] + bins[1:])

    return MetricsReport(
        mean_offset_mm=float(all_offsets.mean()),
        std_offset_mm=float(all_offsets.std()),
        containment_2mm_fraction=float(np.mean(np.abs(all_offsets) <= 2.0)),
        max_envelope_mm=max_env[observed],
        min_envelope_mm=min_env[observed],
        envelope_x_mm=centers[observed],
        peak_excursion_mm=float(np.max(np.abs(all_offsets))),
        mean_end_drift_mm=float(np.mean(end_drifts)),
        avg_speed_mm_per_s=float(np.mean(speeds)) if speeds else 0.0,
        per_run_speed_mm_per_s=[float(s) for s in speeds],
        reaction_times_s=reactions,
        compliance_durations_s=compliances,
        sample_count=int(sum(len(log.samples) for log in logs)),
    )
