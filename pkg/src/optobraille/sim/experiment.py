"""Closed-loop experiment runner.

Each repetition places the simulated finger at the start of a text line
and interleaves finger physics (100 Hz) with the perception/feedback
pipeline (default 3 Hz, matching the processing rate of the embedded
system being modeled). With feedback on, commands steer the finger model;
with feedback off the run is open loop and only the trajectory is
recorded. The feedback geometry can come from the full vision stack
(camera render, fingertip, lines) or from the known page geometry (the
"oracle" source used for fast calibration); both feed the identical
strength law and command state machine.

Runs are deterministic: repetition seeds derive from the experiment seed
via SeedSequence.spawn.
"""

from __future__ import annotations

import json
import time
from dataclasses import dataclass, field, asdict

import numpy as np

from optobraille.errors import NoDeviceFound, NoLineAboveFinger, PipelineStall
from optobraille.feedback import (
    CommandEvaluator,
    CommandKind,
    DeadbandConfig,
    LinePosition,
    classify_line_position,
    feedback_strength,
    geometry_from_lines,
)
from optobraille.feedback.law import BaselineGeometry
from optobraille.geometry import Rect
from optobraille.imageops import rgb_to_lab
from optobraille.page import cluster_text_lines, detect_corners, detect_fingertip, segment_page
from optobraille.page.lines import LineRegion
from optobraille.page.words import select_line_above
from optobraille.sim.camera import SimCamera, SimCameraConfig
from optobraille.sim.finger import FingerModelParams, FingerState, step_finger
from optobraille.sim.page import PageLayout, render_page


@dataclass(frozen=True)
class ExperimentConfig:
    layout: PageLayout = field(default_factory=PageLayout)
    camera: SimCameraConfig = field(default_factory=SimCameraConfig)
    finger: FingerModelParams = field(default_factory=FingerModelParams)
    deadband: DeadbandConfig = field(default_factory=DeadbandConfig)
    feedback_on: bool = True
    repetitions: int = 1
    seed: int = 0
    line_index: int = 0
    pipeline_rate_hz: float = 3.0
    physics_rate_hz: float = 100.0
    log_rate_hz: float = 50.0
    page_dpmm: float = 8.0
    feedback_source: str = "vision"  # "vision" | "oracle"
    max_duration_s: float = 90.0

    def __post_init__(self):
        if self.feedback_source not in ("vision", "oracle"):
            raise ValueError("feedback_source must be 'vision' or 'oracle'")
        if self.repetitions < 1:
            raise ValueError("repetitions must be >= 1")


@dataclass(frozen=True)
class CommandEvent:
    t: float
    kind: str
    strength: float
    d1: float
    d2: float
    d3: float
    tip_x: float
    tip_y: float


@dataclass
class TrajectoryLog:
    samples: list[tuple[float, float, float, str]]  # (t, x_mm, y_mm, active kind)
    commands: list[CommandEvent]
    metadata: dict

    @property
    def t(self) -> np.ndarray:
        return np.array([s[0] for s in self.samples])

    @property
    def x_mm(self) -> np.ndarray:
        return np.array([s[1] for s in self.samples])

    @property
    def y_mm(self) -> np.ndarray:
        return np.array([s[2] for s in self.samples])


def _oracle_geometry(layout: PageLayout, line_index: int, finger_y_mm: float) -> BaselineGeometry:
    """Distances from the known page geometry, in millimeters."""
    baseline_y = layout.gap_baseline_y_mm(line_index)
    half_gap = (layout.line_pitch_mm - layout.line_height_mm) / 2.0
    return BaselineGeometry(d1=half_gap, d2=half_gap,
                            d3=abs(finger_y_mm - baseline_y),
                            above_baseline=finger_y_mm < baseline_y)


class VisionFeedback:
    """Per-frame strength estimation through the full vision stack."""

    def __init__(self, cfg: ExperimentConfig, camera: SimCamera, page):
        self.cfg = cfg
        self.camera = camera
        self.page = page
        self.pitch_px = cfg.layout.line_pitch_mm * camera.cfg.px_per_mm

    def strength(self, state: FingerState, rng) -> float | None:
        """Signed s for the current finger pose, or None when the frame
        yields no usable geometry."""
        frame = self.camera.capture(self.page, self.cfg.page_dpmm,
                                    state.x_mm, state.y_mm, rng=rng, t=state.t)
        rect = self.camera.undistort(frame)
        lab = rgb_to_lab(rect.data)
        try:
            tip = detect_fingertip(rect, lab=lab)
        except NoDeviceFound:
            return None
        mask = segment_page(rect, tip.device_mask, lab=lab)
        corners = detect_corners(rect.gray(), mask)
        lines = cluster_text_lines(corners, rect.data.shape[:2], pitch_px=self.pitch_px)
        try:
            upper = select_line_above(lines, tip)
        except NoLineAboveFinger:
            return None
        lower = next((ln for ln in lines if ln.bbox.y0 > upper.bbox.y1), None)
        geometry = geometry_from_lines(upper, lower, tip.y, nominal_pitch=self.pitch_px)
        try:
            return feedback_strength(geometry)
        except Exception:
            return None


def _full_line_region(layout: PageLayout, line_index: int, dpmm: float) -> LineRegion:
    """The tracked line's page-frame extent, for begin/end classification."""
    x0, x1 = layout.line_x_span_mm(line_index)
    y_c = layout.line_center_y_mm(line_index)
    h = layout.line_height_mm / 2.0
    bbox = Rect(x0 * dpmm, (y_c - h) * dpmm, x1 * dpmm, (y_c + h) * dpmm)
    return LineRegion(id=line_index, baseline_points=np.empty((0, 2)),
                      bbox=bbox, angle=0.0, corner_count=0)


class _TipProxy:
    def __init__(self, x, y):
        self.x = x
        self.y = y


def run_repetition(cfg: ExperimentConfig, rep_index: int, seed_seq: np.random.SeedSequence,
                   camera: SimCamera | None = None, page=None) -> TrajectoryLog:
    rng = np.random.default_rng(seed_seq)
    if page is None:
        page = render_page(cfg.layout, cfg.page_dpmm)
    if camera is None and cfg.feedback_source == "vision":
        camera = SimCamera(cfg.camera)

    x_start, x_end = cfg.layout.line_x_span_mm(cfg.line_index)
    baseline_y = cfg.layout.gap_baseline_y_mm(cfg.line_index)
    state = FingerState.initial(x_start, baseline_y, cfg.finger, rng)
    evaluator = CommandEvaluator(cfg.deadband)
    vision = VisionFeedback(cfg, camera, page) if cfg.feedback_source == "vision" else None
    line_region = _full_line_region(cfg.layout, cfg.line_index, cfg.page_dpmm)

    dt = 1.0 / cfg.physics_rate_hz
    pipeline_interval = 1.0 / cfg.pipeline_rate_hz
    log_interval = 1.0 / cfg.log_rate_hz
    next_pipeline = 0.0
    next_log = 0.0
    last_found_t = 0.0
    active = CommandKind.NONE

    samples: list[tuple[float, float, float, str]] = []
    commands: list[CommandEvent] = []

    while state.x_mm < x_end and state.t <= cfg.max_duration_s:
        if cfg.feedback_on and state.t >= next_pipeline - 1e-9:
            next_pipeline += pipeline_interval
            if vision is not None:
                s = vision.strength(state, rng)
            else:
                s = feedback_strength(_oracle_geometry(cfg.layout, cfg.line_index, state.y_mm))

            if s is None:
                if state.t - last_found_t > 2.0:
                    raise PipelineStall(
                        f"no usable geometry for {state.t - last_found_t:.1f}s "
                        f"(rep {rep_index}, t={state.t:.1f}s)")
            else:
                last_found_t = state.t
                tip_px = (state.x_mm * cfg.page_dpmm, state.y_mm * cfg.page_dpmm)
                position = classify_line_position(_TipProxy(*tip_px), line_region, cfg.deadband)
                cmd = evaluator.update(s, position, timestamp=state.t)
                if cmd.kind != active or cmd.kind in (CommandKind.NEW_LINE,):
                    geo = _oracle_geometry(cfg.layout, cfg.line_index, state.y_mm)
                    commands.append(CommandEvent(
                        t=round(state.t, 6), kind=cmd.kind.value, strength=cmd.strength,
                        d1=geo.d1, d2=geo.d2, d3=geo.d3,
                        tip_x=tip_px[0], tip_y=tip_px[1]))
                active = cmd.kind
                if cmd.kind == CommandKind.NEW_LINE:
                    break

        if state.t >= next_log - 1e-9:
            next_log += log_interval
            samples.append((round(state.t, 6), state.x_mm, state.y_mm, active.value))

        step_finger(state, active if cfg.feedback_on else None, cfg.finger, dt)

    samples.append((round(state.t, 6), state.x_mm, state.y_mm, active.value))
    # canonical JSON types so saved and in-memory logs compare equal
    metadata = {
        "repetition": rep_index,
        "seed_entropy": str(seed_seq.entropy),
        "spawn_key": [int(k) for k in seed_seq.spawn_key],
        "feedback_on": cfg.feedback_on,
        "feedback_source": cfg.feedback_source,
        "line_index": cfg.line_index,
        "line_center_y_mm": baseline_y,
        "line_span_mm": [x_start, x_end],
        "pipeline_rate_hz": cfg.pipeline_rate_hz,
        "physics_rate_hz": cfg.physics_rate_hz,
        "log_rate_hz": cfg.log_rate_hz,
        "finger": asdict(cfg.finger),
        "deadband": asdict(cfg.deadband),
    }
    metadata = json.loads(json.dumps(metadata, sort_keys=True))
    return TrajectoryLog(samples=samples, commands=commands, metadata=metadata)


_WORKER_CACHE: dict = {}


def _run_repetition_task(args):
    cfg, index, seed_seq = args
    key = (cfg.layout, cfg.camera, cfg.page_dpmm, cfg.feedback_source)
    cached = _WORKER_CACHE.get(key)
    if cached is None:
        page = render_page(cfg.layout, cfg.page_dpmm)
        camera = SimCamera(cfg.camera) if cfg.feedback_source == "vision" else None
        _WORKER_CACHE.clear()
        _WORKER_CACHE[key] = cached = (page, camera)
    page, camera = cached
    return run_repetition(cfg, index, seed_seq, camera=camera, page=page)


def run_experiment(cfg: ExperimentConfig, progress=None,
                   workers: int = 1) -> list[TrajectoryLog]:
    """All repetitions of one experiment; deterministic for a fixed cfg.

    Repetitions are independent (each derives its own seed), so they may
    run on several worker processes; results come back in index order and
    are identical to a serial run.
    """
    seeds = np.random.SeedSequence(cfg.seed).spawn(cfg.repetitions)
    t0 = time.perf_counter()

    if workers > 1 and cfg.repetitions > 1:
        import multiprocessing as mp

        tasks = [(cfg, i, seeds[i]) for i in range(cfg.repetitions)]
        with mp.get_context("spawn").Pool(min(workers, cfg.repetitions)) as pool:
            logs = []
            for i, log in enumerate(pool.imap(_run_repetition_task, tasks)):
                logs.append(log)
                if progress:
                    progress(i + 1, cfg.repetitions, time.perf_counter() - t0)
        return logs

    page = render_page(cfg.layout, cfg.page_dpmm)
    camera = SimCamera(cfg.camera) if cfg.feedback_source == "vision" else None
    logs = []
    for i in range(cfg.repetitions):
        logs.append(run_repetition(cfg, i, seeds[i], camera=camera, page=page))
        if progress:
            progress(i + 1, cfg.repetitions, time.perf_counter() - t0)
    return logs
