"""Session service: page setup, the LivePointer stream, logs, metrics.

Wire protocol (JSON over one WebSocket per session):
  client -> {"t": seconds, "x": mm, "y": mm}          pointer samples
  server -> {"t", "kind", "strength", "dots16"}       at pipeline cadence

In LivePointer mode the pointer substitutes for the fingertip detector
and the rendered page for the camera; the baseline geometry, strength
law, command machine, and Braille composition are the same code the
vision loop runs. Session time is client time, so logs and metrics are
reproducible regardless of transport jitter.
"""

from __future__ import annotations

import io
import json
import secrets
from dataclasses import dataclass, field

import numpy as np
from fastapi import FastAPI, HTTPException, WebSocket, WebSocketDisconnect
from fastapi.responses import JSONResponse, PlainTextResponse, Response

from optobraille.ebraille.cells import BrailleCell, encode_char
from optobraille.ebraille.frames import compose_frame
from optobraille.errors import UnsupportedCharacter
from optobraille.feedback import (
    CommandEvaluator,
    CommandKind,
    classify_line_position,
    feedback_strength,
)
from optobraille.feedback.law import BaselineGeometry
from optobraille.harness.config import PipelineConfig
from optobraille.harness.logs import command_records, trajectory_records
from optobraille.sim.experiment import CommandEvent, TrajectoryLog
from optobraille.sim.metrics import compute_metrics
from optobraille.sim.page import PageLayout, render_page


@dataclass
class _Session:
    session_id: str
    mode: str
    layout: PageLayout
    line_index: int
    pipeline_interval: float
    evaluator: CommandEvaluator
    config: PipelineConfig
    samples: list[tuple[float, float, float, str]] = field(default_factory=list)
    commands: list[CommandEvent] = field(default_factory=list)
    braille_queue: list[BrailleCell] = field(default_factory=list)
    last_word: str | None = None
    next_tick: float = 0.0
    active_kind: str = "None"
    closed: bool = False

    def geometry(self) -> dict:
        spans = [self.layout.line_x_span_mm(i) for i in range(len(self.layout.text))]
        return {
            "linePitchMm": self.layout.line_pitch_mm,
            "lineHeightMm": self.layout.line_height_mm,
            "pageWidthMm": self.layout.page_width_mm,
            "pageHeightMm": self.layout.page_height_mm,
            "trackedLine": self.line_index,
            "trackedBaselineYMm": self.layout.gap_baseline_y_mm(self.line_index),
            "lines": [
                {"index": i, "centerYMm": self.layout.line_center_y_mm(i),
                 "x0Mm": spans[i][0], "x1Mm": spans[i][1], "text": self.layout.text[i]}
                for i in range(len(self.layout.text))
            ],
        }

    def _word_under(self, x_mm: float) -> str | None:
        text = self.layout.text[self.line_index]
        adv = self.layout.char_advance_mm
        idx = int((x_mm - self.layout.margin_mm) / adv)
        if idx < 0 or idx >= len(text) or text[idx] == " ":
            return None
        start = text.rfind(" ", 0, idx) + 1
        end = text.find(" ", idx)
        return text[start: end if end >= 0 else len(text)]

    def _line_region(self):
        from optobraille.geometry import Rect
        from optobraille.page.lines import LineRegion

        x0, x1 = self.layout.line_x_span_mm(self.line_index)
        yc = self.layout.line_center_y_mm(self.line_index)
        h = self.layout.line_height_mm / 2
        return LineRegion(id=self.line_index, baseline_points=np.empty((0, 2)),
                          bbox=Rect(x0, yc - h, x1, yc + h),
                          angle=0.0, corner_count=0)

    def handle_sample(self, t: float, x_mm: float, y_mm: float) -> dict | None:
        """Record a pointer sample; returns a command message when the
        pipeline cadence fires."""
        self.samples.append((t, x_mm, y_mm, self.active_kind))
        if t < self.next_tick:
            return None
        self.next_tick = t + self.pipeline_interval

        baseline = self.layout.gap_baseline_y_mm(self.line_index)
        half_gap = (self.layout.line_pitch_mm - self.layout.line_height_mm) / 2
        geometry = BaselineGeometry(d1=half_gap, d2=half_gap,
                                    d3=abs(y_mm - baseline),
                                    above_baseline=y_mm < baseline)
        s = feedback_strength(geometry)

        class _Tip:
            pass

        tip = _Tip()
        tip.x = x_mm
        position = classify_line_position(tip, self._line_region(), self.config.deadband)
        command = self.evaluator.update(s, position, timestamp=t)
        self.active_kind = command.kind.value

        if command.kind == CommandKind.NONE:
            word = self._word_under(x_mm)
            if word and word != self.last_word:
                self.last_word = word
                for ch in word:
                    try:
                        self.braille_queue.append(encode_char(ch, self.config.dialect))
                    except UnsupportedCharacter:
                        pass
        cell = self.braille_queue.pop(0) if self.braille_queue else BrailleCell(0)
        electrode = compose_frame(cell, command)

        self.commands.append(CommandEvent(
            t=t, kind=command.kind.value, strength=command.strength,
            d1=geometry.d1, d2=geometry.d2, d3=geometry.d3, tip_x=x_mm, tip_y=y_mm))
        return {"t": t, "kind": command.kind.value,
                "strength": command.strength, "dots16": electrode.dots16}

    def to_log(self) -> TrajectoryLog:
        x0, x1 = self.layout.line_x_span_mm(self.line_index)
        return TrajectoryLog(
            samples=list(self.samples),
            commands=list(self.commands),
            metadata={
                "sessionId": self.session_id,
                "mode": self.mode,
                "line_index": self.line_index,
                "line_center_y_mm": self.layout.gap_baseline_y_mm(self.line_index),
                "line_span_mm": [x0, x1],
                "repetition": 0,
            })


def create_app(config: PipelineConfig | None = None,
               layout: PageLayout | None = None,
               ui_dir: str | None = None) -> FastAPI:
    config = config or PipelineConfig()
    layout = layout or PageLayout()
    app = FastAPI(title="optobraille session service")
    sessions: dict[str, _Session] = {}

    @app.get("/healthz")
    def healthz():
        return {"status": "ok"}

    @app.post("/sessions")
    def create_session(body: dict | None = None):
        body = body or {}
        mode = body.get("mode", "LivePointer")
        if mode not in ("LivePointer", "SimulatedFinger"):
            raise HTTPException(422, f"unknown mode {mode!r}")
        line_index = int(body.get("lineIndex", 0))
        if not 0 <= line_index < len(layout.text):
            raise HTTPException(422, "lineIndex out of range")
        session_id = secrets.token_hex(8)
        session = _Session(
            session_id=session_id, mode=mode, layout=layout, line_index=line_index,
            pipeline_interval=1.0 / config.target_frame_rate_hz,
            evaluator=CommandEvaluator(config.deadband), config=config)
        sessions[session_id] = session
        return {"sessionId": session_id, "pageGeometry": session.geometry(),
                "pageImageUrl": f"/sessions/{session_id}/page.png",
                "pipelineRateHz": config.target_frame_rate_hz}

    def _get(session_id: str) -> _Session:
        session = sessions.get(session_id)
        if session is None or session.closed:
            raise HTTPException(404, "unknown session")
        return session

    @app.get("/sessions/{session_id}/page.png")
    def page_png(session_id: str, dpmm: float = 2.0):
        _get(session_id)
        from PIL import Image

        frame = render_page(layout, dpmm)
        buf = io.BytesIO()
        Image.fromarray(frame.to_uint8()).save(buf, format="PNG")
        return Response(content=buf.getvalue(), media_type="image/png")

    @app.get("/sessions/{session_id}/log")
    def session_log(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        log = session.to_log()
        lines = [json.dumps({"metadata": log.metadata}, sort_keys=True)]
        lines += [json.dumps(r, sort_keys=True) for r in trajectory_records(log)]
        lines += [json.dumps({"command": r}, sort_keys=True) for r in command_records(log)]
        return PlainTextResponse("\n".join(lines) + "\n", media_type="application/jsonl")

    @app.delete("/sessions/{session_id}")
    def close_session(session_id: str):
        session = sessions.get(session_id)
        if session is None:
            raise HTTPException(404, "unknown session")
        session.closed = True
        log = session.to_log()
        if not log.samples:
            return JSONResponse({"sessionId": session_id, "metrics": None})
        metrics = compute_metrics([log])
        return JSONResponse({"sessionId": session_id, "metrics": metrics.as_dict()})

    @app.websocket("/sessions/{session_id}/stream")
    async def stream(ws: WebSocket, session_id: str):
        session = sessions.get(session_id)
        if session is None or session.closed:
            await ws.close(code=4404)
            return
        await ws.accept()
        try:
            while True:
                raw = await ws.receive_text()
                try:
                    msg = json.loads(raw)
                    t, x, y = float(msg["t"]), float(msg["x"]), float(msg["y"])
                except (ValueError, KeyError, TypeError) as exc:
                    # malformed sample: report and keep the stream open
                    await ws.send_text(json.dumps({"error": f"bad sample: {exc}"}))
                    continue
                reply = session.handle_sample(t, x, y)
                if reply is not None:
                    await ws.send_text(json.dumps(reply, sort_keys=True))
        except WebSocketDisconnect:
            return

    if ui_dir:
        from pathlib import Path

        if Path(ui_dir).is_dir():
            from fastapi.staticfiles import StaticFiles

            app.mount("/ui", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
