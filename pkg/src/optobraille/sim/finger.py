"""Stochastic human finger model: delayed-reaction bang-bang correction.

The finger scans forward at a nominal speed while its height drifts with
a per-run constant bias plus a random walk. The bias couples to distance
traveled, not time: an arm sweeping along a line follows a slightly
wrong arc, so the faster the scan, the faster the drift. A directional
command is noticed only after a sampled reaction delay; the user then
corrects in the commanded direction at a fixed speed for a sampled
compliance duration (or until the command clears), moving markedly
slower while a command is being handled, occasionally even backward
along the line.

All randomness flows through one generator owned by the state, so runs
are reproducible from their seed. The random-walk sigma is calibrated at
the 100 Hz physics step.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from optobraille.feedback.commands import CommandKind

PHYSICS_RATE_HZ = 100.0


@dataclass(frozen=True)
class FingerModelParams:
    scan_speed_mm_per_s: float = 18.21
    drift_bias_mm_per_mm: float = 0.065  # per-run bias scale, mm of y per mm of x
    drift_sigma_mm: float = 0.01         # random-walk std per physics step
    reaction_median_s: float = 0.75      # lognormal median of the slow branch
    reaction_log_sigma: float = 0.35     # lognormal shape
    reaction_fast_prob: float = 0.1      # chance of an immediate-recognition response
    reaction_fast_range_s: tuple = (0.1, 0.4)
    reaction_clip_s: tuple = (0.3, 1.6)  # observed-delay envelope for the slow branch
    compliance_mean_s: float = 2.0
    compliance_sigma_s: float = 0.35
    correction_speed_mm_per_s: float = 2.0
    compliance_slowdown: float = 0.05    # x-speed factor while handling a command
    overshoot_s: float = 0.35            # correction carried past the command clearing
    backtrack_prob: float = 0.1          # chance a compliance episode moves backward
    seed: int = 0

    def __post_init__(self):
        for name in ("scan_speed_mm_per_s", "reaction_median_s", "compliance_mean_s",
                     "correction_speed_mm_per_s"):
            if getattr(self, name) <= 0:
                raise ValueError(f"{name} must be positive")
        if not 0 <= self.compliance_slowdown <= 1:
            raise ValueError("compliance_slowdown must be in [0, 1]")
        object.__setattr__(self, "reaction_fast_range_s", tuple(self.reaction_fast_range_s))
        object.__setattr__(self, "reaction_clip_s", tuple(self.reaction_clip_s))


def sample_reaction_delay(rng: np.random.Generator, params: FingerModelParams) -> float:
    """Mixture: occasional immediate recognition, otherwise a lognormal
    analysis delay clipped to the observed envelope."""
    if rng.random() < params.reaction_fast_prob:
        return float(rng.uniform(*params.reaction_fast_range_s))
    raw = rng.lognormal(np.log(params.reaction_median_s), params.reaction_log_sigma)
    return float(np.clip(raw, *params.reaction_clip_s))


def sample_compliance_duration(rng: np.random.Generator, params: FingerModelParams) -> float:
    return float(max(0.5, rng.normal(params.compliance_mean_s, params.compliance_sigma_s)))


@dataclass
class FingerState:
    t: float
    x_mm: float
    y_mm: float
    bias_mm_per_mm: float
    rng: np.random.Generator
    phase: str = "scan"                 # scan | react | comply
    phase_timer: float = 0.0
    comply_dir: float = 0.0             # +1 moves down (y grows), -1 up
    comply_backward: bool = False
    handled_kind: CommandKind | None = None

    @staticmethod
    def initial(x_mm: float, y_mm: float, params: FingerModelParams,
                rng: np.random.Generator) -> "FingerState":
        # per-run bias: random side and magnitude around the configured scale
        side = 1.0 if rng.random() < 0.5 else -1.0
        magnitude = params.drift_bias_mm_per_mm * rng.uniform(0.5, 1.5)
        return FingerState(t=0.0, x_mm=x_mm, y_mm=y_mm,
                           bias_mm_per_mm=side * magnitude, rng=rng)


_DIRECTIONAL = {CommandKind.DOWN: 1.0, CommandKind.UP: -1.0}


def step_finger(state: FingerState, cmd: CommandKind | None,
                params: FingerModelParams, dt: float) -> FingerState:
    """Advance the finger by dt seconds under the active command (mutates
    and returns the state)."""
    if dt <= 0:
        raise ValueError("dt must be positive")
    rng = state.rng

    directional = cmd if cmd in _DIRECTIONAL else None

    if directional is not None and directional != state.handled_kind:
        # a new (or flipped) command: the user starts analyzing it
        state.handled_kind = directional
        state.phase = "react"
        state.phase_timer = sample_reaction_delay(rng, params)
    elif directional is None and state.handled_kind is not None:
        # command cleared; a short correction overshoot rides past it
        state.handled_kind = None
        if state.phase == "comply" and params.overshoot_s > 0:
            state.phase_timer = min(state.phase_timer, params.overshoot_s)
        else:
            state.phase = "scan"

    slow = params.compliance_slowdown if state.phase in ("react", "comply") else 1.0
    backward = -1.0 if (state.phase == "comply" and state.comply_backward) else 1.0
    dx = backward * params.scan_speed_mm_per_s * slow * dt
    state.x_mm += dx

    if state.phase == "comply":
        state.y_mm += state.comply_dir * params.correction_speed_mm_per_s * dt
        state.phase_timer -= dt
        if state.phase_timer <= 0:
            state.phase = "scan"
            state.handled_kind = None
    else:
        state.y_mm += state.bias_mm_per_mm * dx + rng.normal(0.0, params.drift_sigma_mm)
        if state.phase == "react":
            state.phase_timer -= dt
            if state.phase_timer <= 0:
                state.phase = "comply"
                state.phase_timer = sample_compliance_duration(rng, params)
                state.comply_dir = _DIRECTIONAL[state.handled_kind]
                state.comply_backward = rng.random() < params.backtrack_prob

    state.t += dt
    return state
