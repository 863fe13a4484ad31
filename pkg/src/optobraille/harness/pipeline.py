"""The per-frame pipeline: rectify, detect, read, command.

Each step runs the full loop body: undistort the frame (and optionally
deblur), find the fingertip and text lines, derive the feedback strength
and command, and when the finger is on-line extract and recognize the
focused word, queue its characters as Braille cells, and advance the
simulated current regulation. Character playback shares the electrode
frame with command side dots; the command pattern always reflects the
current command (movement cues take priority over queued characters).

Per-frame failures (no device, no lines) surface in the diagnostics and
yield a None command; they never abort the session.
"""

from __future__ import annotations

import time
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from optobraille.ebraille.cells import BrailleCell, encode_char
from optobraille.ebraille.frames import ElectrodeFrame, compose_frame
from optobraille.ebraille.waveform import regulate_current
from optobraille.errors import (
    NoDeviceFound,
    NoLineAboveFinger,
    UnsupportedCharacter,
)
from optobraille.feedback import (
    CommandEvaluator,
    CommandKind,
    FeedbackCommand,
    classify_line_position,
    feedback_strength,
    geometry_from_lines,
)
from optobraille.frame import Frame
from optobraille.harness.config import PipelineConfig, load_calibration_file
from optobraille.imageops import rgb_to_lab
from optobraille.imaging.deblur import DeconvConfig, blind_deconvolve
from optobraille.imaging.fisheye import UndistortMap
from optobraille.motion import detect_features, estimate_motion, track_flow
from optobraille.page import (
    TemplateMatcherOcr,
    cluster_text_lines,
    corners_to_blobs,
    detect_corners,
    detect_fingertip,
    recognize_word,
    segment_page,
)
from optobraille.page.ocr import ExternalProcessOcr
from optobraille.page.words import extract_focused_word, select_line_above

FEATURE_REFRESH_INTERVAL = 15  # frames
FEATURE_MIN_FRACTION = 0.5
MAX_FEATURES = 50


@dataclass
class PipelineStepResult:
    command: FeedbackCommand
    electrode_frame: ElectrodeFrame
    diagnostics: dict = field(default_factory=dict)


def make_ocr_engine(spec: str):
    if spec == "template":
        return TemplateMatcherOcr()
    if spec.startswith("external:"):
        return ExternalProcessOcr(spec.split(":", 1)[1])
    raise ValueError(f"unknown OCR engine {spec!r}")


class PipelineSession:
    """Owns the per-session state of the frame loop: hysteresis, Braille
    queue, feature tracks, and the regulation loop."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self.evaluator = CommandEvaluator(config.deadband)
        self.ocr = make_ocr_engine(config.ocr_engine)
        self.braille_queue: deque[BrailleCell] = deque()
        self.stim_params = config.stimulation
        self.command_log: list[dict] = []
        self._undistort: UndistortMap | None = None
        self._prev_gray: np.ndarray | None = None
        self._features: np.ndarray | None = None
        self._frame_index = 0
        self._last_word: tuple | None = None
        if config.calibration_path:
            cal = load_calibration_file(config.calibration_path)
            self._undistort = UndistortMap(cal.intrinsics, cal.distortion,
                                           cal.width, cal.height, perspective=True)

    # -- internals ------------------------------------------------------------

    def _rectify(self, frame: Frame, diag: dict) -> Frame:
        if self._undistort is not None and (frame.height == self._undistort.height
                                            and frame.width == self._undistort.width):
            frame = self._undistort.apply(frame)
            diag["rectified"] = True
        if self.config.deblur:
            result = blind_deconvolve(frame.gray(), DeconvConfig(max_iterations=5))
            diag["deblur_objective"] = result.final_objective
            frame = result.frame
        return frame

    def _motion(self, gray: np.ndarray, diag: dict):
        if self._prev_gray is not None and self._features is not None and len(self._features):
            flow = track_flow(self._prev_gray, gray, self._features,
                              pyramid_levels=3, frame_interval=1.0 / self.config.target_frame_rate_hz)
            src, dst = flow.tracked_arrays()
            diag["tracked_points"] = len(src)
            if len(src) >= 3:
                try:
                    motion = estimate_motion(flow)
                    diag["motion_translation_px"] = [float(motion.b[0]), float(motion.b[1])]
                except Exception as exc:
                    diag["motion_error"] = str(exc)
                self._features = dst
        refresh = (self._frame_index % FEATURE_REFRESH_INTERVAL == 0
                   or self._features is None
                   or len(self._features) < FEATURE_MIN_FRACTION * MAX_FEATURES)
        if refresh:
            self._features = detect_features(gray, MAX_FEATURES)
        self._prev_gray = gray

    def _read_word(self, lines, tip, gray, diag) -> None:
        blobs = corners_to_blobs(diag["_corners"], gray.shape,
                                 pitch_px=self.config.line_pitch_px, word_level=True)
        crop = extract_focused_word(lines, tip, gray, blobs)
        key = (crop.bbox.x0, crop.bbox.y0, crop.bbox.x1, crop.bbox.y1, crop.line_id)
        if self._last_word is not None and key == self._last_word:
            return  # same word still under the finger; characters already queued
        result = recognize_word(crop, self.ocr)
        diag["word_text"] = result.text
        diag["word_confidence"] = result.confidence
        diag["word_bbox"] = [crop.bbox.x0, crop.bbox.y0, crop.bbox.x1, crop.bbox.y1]
        if result.text:
            self._last_word = key
            for ch in result.text:
                try:
                    self.braille_queue.append(encode_char(ch, self.config.dialect))
                except UnsupportedCharacter:
                    diag.setdefault("unsupported_chars", []).append(ch)

    # -- public ----------------------------------------------------------------

    def step(self, frame: Frame) -> PipelineStepResult:
        t0 = time.perf_counter()
        diag: dict = {"t": frame.t, "errors": []}
        self._frame_index += 1

        rect = self._rectify(frame, diag)
        gray_frame = rect.gray()
        gray = gray_frame.data

        command = FeedbackCommand(CommandKind.NONE, 0.0, frame.t)
        lab = rgb_to_lab(rect.data) if rect.is_color else None
        tip = None
        try:
            if lab is None:
                raise NoDeviceFound("grayscale frame carries no device color")
            tip = detect_fingertip(rect, lab=lab)
            diag["tip"] = [tip.x, tip.y]
            diag["tip_confidence"] = tip.confidence
        except NoDeviceFound as exc:
            diag["errors"].append(f"NoDeviceFound: {exc}")

        mask = segment_page(rect, tip.device_mask if tip else None, lab=lab)
        corners = detect_corners(gray_frame, mask)
        diag["corner_count"] = int(len(corners))
        diag["_corners"] = corners
        lines = cluster_text_lines(corners, gray.shape, pitch_px=self.config.line_pitch_px)
        diag["line_count"] = len(lines)
        diag["lines"] = [[ln.bbox.x0, ln.bbox.y0, ln.bbox.x1, ln.bbox.y1] for ln in lines]
        if lines:
            diag["block_angle_rad"] = lines[0].angle

        if not lines:
            diag["errors"].append("NoLinesFound: no text-line regions")
        elif tip is not None:
            try:
                upper = select_line_above(lines, tip)
                lower = next((ln for ln in lines if ln.bbox.y0 > upper.bbox.y1), None)
                geometry = geometry_from_lines(upper, lower, tip.y,
                                               nominal_pitch=self.config.line_pitch_px)
                s = feedback_strength(geometry)
                position = classify_line_position(tip, upper, self.config.deadband)
                command = self.evaluator.update(s, position, timestamp=frame.t)
                diag["strength"] = s
                diag["position"] = position.value
                self.command_log.append({
                    "t": frame.t, "kind": command.kind.value, "strength": command.strength,
                    "d1": geometry.d1, "d2": geometry.d2, "d3": geometry.d3,
                    "tipX": tip.x, "tipY": tip.y,
                })
                if command.kind == CommandKind.NONE:
                    try:
                        self._read_word(lines, tip, gray, diag)
                    except NoLineAboveFinger as exc:
                        diag["errors"].append(f"NoLineAboveFinger: {exc}")
            except NoLineAboveFinger as exc:
                diag["errors"].append(f"NoLineAboveFinger: {exc}")
            except Exception as exc:  # keep the session alive per contract
                diag["errors"].append(f"{type(exc).__name__}: {exc}")

        self._motion(gray, diag)

        cell = self.braille_queue.popleft() if self.braille_queue else BrailleCell(0)
        electrode = compose_frame(cell, command)
        if cell.dots:
            # Braille output is active: one regulation step against the
            # configured skin load
            measured = self.stim_params.voltage_v / self.config.skin_load_mohm
            self.stim_params = regulate_current(measured, self.stim_params)
            diag["regulated_voltage_v"] = self.stim_params.voltage_v

        diag["queue_depth"] = len(self.braille_queue)
        diag["elapsed_ms"] = (time.perf_counter() - t0) * 1e3
        diag.pop("_corners")
        return PipelineStepResult(command=command, electrode_frame=electrode,
                                  diagnostics=diag)


def pipeline_step(frame: Frame, session: PipelineSession) -> tuple[FeedbackCommand, ElectrodeFrame, dict]:
    """Functional wrapper over PipelineSession.step."""
    result = session.step(frame)
    return result.command, result.electrode_frame, result.diagnostics
