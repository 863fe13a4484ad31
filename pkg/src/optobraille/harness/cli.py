"""Command-line interface.

Subcommands:
  pipeline    run the frame loop over an image or directory
  experiment  run seeded open/closed-loop simulations, write logs + metrics
  calibrate   search finger-model parameters against the tracking targets
  serve       start the session service (serves the web UI when built)
  braille     translate text to dot patterns / waveform CSV
  metrics     recompute a MetricsReport from trajectory logs (JSONL or CSV)
  benchmark   measure full-pipeline throughput at 640x480

Exit codes: 0 success, 1 runtime failure (machine-readable error on
stderr), 2 usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import asdict, replace
from pathlib import Path

import numpy as np


def _error(msg: str) -> int:
    sys.stderr.write(json.dumps({"error": msg}) + "\n")
    return 1


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_pipeline(args) -> int:
    from optobraille.frame import load_image, save_image
    from optobraille.harness.config import layered_config
    from optobraille.harness.logs import dump_jsonl
    from optobraille.harness.pipeline import PipelineSession

    cfg = layered_config(args.config, overrides={
        "calibration_path": args.calibration, "debug_dump": args.debug or None,
        "ocr_engine": args.ocr, "output_dir": args.output})
    src = Path(args.input)
    paths = sorted(src.glob("*.png")) + sorted(src.glob("*.jpg")) if src.is_dir() else [src]
    if not paths:
        return _error(f"no input frames under {src}")

    session = PipelineSession(cfg)
    out = _out_dir(args)
    records = []
    for i, path in enumerate(paths):
        frame = load_image(path).with_time(i / cfg.target_frame_rate_hz)
        result = session.step(frame)
        record = {"frame": str(path), "command": result.command.kind.value,
                  "strength": result.command.strength,
                  "dots16": result.electrode_frame.dots16,
                  "diagnostics": result.diagnostics}
        records.append(record)
        print(f"{path.name}: {result.command.kind.value} "
              f"(strength {result.command.strength:.2f}, "
              f"lines {result.diagnostics.get('line_count', 0)}, "
              f"word {result.diagnostics.get('word_text', '-')!r})")
        if cfg.debug_dump:
            from optobraille.harness.debug import dump_overlay

            dump_overlay(frame, result.diagnostics, out / f"{path.stem}_overlay.png")
    dump_jsonl(records, out / "pipeline.jsonl")
    dump_jsonl(session.command_log, out / "commands.jsonl")
    return 0


def cmd_experiment(args) -> int:
    from optobraille.harness.logs import save_trajectory
    from optobraille.sim.calibrate import load_params
    from optobraille.sim.experiment import ExperimentConfig, run_experiment
    from optobraille.sim.finger import FingerModelParams
    from optobraille.sim.metrics import compute_metrics
    from optobraille.sim.plots import render_all

    finger = load_params(args.params) if args.params else FingerModelParams()
    cfg = ExperimentConfig(
        finger=finger,
        feedback_on=args.feedback == "on",
        repetitions=args.reps,
        seed=args.seed,
        feedback_source=args.source,
    )
    out = _out_dir(args)
    logs = run_experiment(cfg, workers=args.workers)
    metrics = compute_metrics(logs)

    for i, log in enumerate(logs):
        save_trajectory(log, out / f"run_{i:03d}.jsonl")
    with open(out / "metrics.json", "w") as fh:
        json.dump(metrics.as_dict(), fh, indent=2, sort_keys=True)
    with open(out / "metrics.csv", "w") as fh:
        fh.write("key,value\n")
        for key, value in metrics.as_dict().items():
            if isinstance(value, (int, float)):
                fh.write(f"{key},{value!r}\n")
    if args.plots:
        render_all(logs, metrics, out / "plots")
    print(json.dumps({
        "repetitions": cfg.repetitions,
        "feedback": args.feedback,
        "containment2mmFraction": metrics.containment_2mm_fraction,
        "stdOffsetMm": metrics.std_offset_mm,
        "meanOffsetMm": metrics.mean_offset_mm,
        "avgSpeedMmPerS": metrics.avg_speed_mm_per_s,
        "meanEndDriftMm": metrics.mean_end_drift_mm,
    }, indent=2, sort_keys=True))
    return 0


def cmd_calibrate(args) -> int:
    from optobraille.errors import CalibrationFailed
    from optobraille.sim.calibrate import calibrate_finger_model, save_params

    out = _out_dir(args)
    try:
        params, report = calibrate_finger_model(seed=args.seed, repetitions=args.reps)
    except CalibrationFailed as exc:
        sys.stderr.write(json.dumps({"error": str(exc), "best": exc.achieved},
                                    default=str) + "\n")
        return 1
    path = out / "finger_params.json"
    save_params(params, path)
    print(json.dumps({"params_file": str(path), "checks": report["checks"],
                      "open": report["open"], "closed": report["closed"]},
                     indent=2, sort_keys=True, default=str))
    return 0


def cmd_serve(args) -> int:
    import uvicorn

    from optobraille.harness.config import layered_config
    from optobraille.harness.service import create_app

    cfg = layered_config(args.config)
    app = create_app(cfg, ui_dir=args.ui_dir)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def cmd_braille(args) -> int:
    from optobraille.ebraille import (
        Dialect,
        StimulationParams,
        compose_frame,
        decode_cell,
        encode_char,
        export_waveform_csv,
        schedule_stimulation,
    )
    from optobraille.feedback.commands import CommandKind, FeedbackCommand

    dialect = Dialect(args.dialect)
    cells = []
    for ch in args.text:
        cell = encode_char(ch, dialect)
        back = decode_cell(cell, dialect)
        if back != ch:
            return _error(f"round-trip failed for {ch!r}")
        cells.append(cell)
        print(f"{ch!r}: dots {cell}")
    if args.waveform:
        out = Path(args.waveform)
        schedules = []
        params = StimulationParams()
        t = 0.0
        from optobraille.ebraille.waveform import WaveformSchedule

        events = []
        for cell in cells:
            sched = schedule_stimulation(
                compose_frame(cell, FeedbackCommand(CommandKind.NONE, 0.0)),
                params, duration=args.cell_duration)
            events.extend(sched.shifted(t).events)
            t += args.cell_duration
        export_waveform_csv(WaveformSchedule(tuple(events)), out)
        print(f"waveform: {out}")
    return 0


def cmd_metrics(args) -> int:
    from optobraille.harness.logs import load_trajectory, load_trajectory_csv
    from optobraille.sim.metrics import compute_metrics

    logs = []
    for path in args.logs:
        p = Path(path)
        if p.suffix == ".csv":
            metadata = json.loads(args.metadata) if args.metadata else {
                "line_center_y_mm": 45.0, "line_span_mm": [22.95, 190.45],
                "repetition": 0}
            logs.append(load_trajectory_csv(p, metadata))
        else:
            logs.append(load_trajectory(p))
    if not logs:
        return _error("no logs given")
    metrics = compute_metrics(logs)
    print(json.dumps(metrics.as_dict(), indent=2, sort_keys=True))
    return 0


def cmd_benchmark(args) -> int:
    from optobraille.frame import Frame
    from optobraille.harness.config import PipelineConfig
    from optobraille.harness.pipeline import PipelineSession
    from optobraille.sim.camera import SimCamera, SimCameraConfig
    from optobraille.sim.page import PageLayout, render_page

    cam_cfg = SimCameraConfig(width=args.width, height=args.height,
                              focal_px=args.width * 0.75)
    camera = SimCamera(cam_cfg)
    layout = PageLayout()
    page = render_page(layout, 8.0)
    cfg = PipelineConfig(line_pitch_px=layout.line_pitch_mm * cam_cfg.px_per_mm)
    session = PipelineSession(cfg)

    frames = []
    rng = np.random.default_rng(0)
    for i in range(args.frames):
        x = 40.0 + i * 1.5
        frames.append(camera.capture(page, 8.0, x, layout.gap_baseline_y_mm(0),
                                     rng=rng, t=i / 3.0))
    session.step(frames[0])  # warm caches outside the timed section

    t0 = time.perf_counter()
    words = 0
    for frame in frames:
        result = session.step(frame)
        words += bool(result.diagnostics.get("word_text"))
    elapsed = time.perf_counter() - t0
    fps = args.frames / elapsed
    print(json.dumps({"frames": args.frames, "elapsedS": round(elapsed, 3),
                      "fps": round(fps, 2), "framesWithWords": words,
                      "resolution": f"{args.width}x{args.height}"}, indent=2))
    return 0 if fps >= 2.0 else _error(f"throughput {fps:.2f} fps below the 2 fps floor")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="optobraille",
                                     description="finger-camera text reading with electro-Braille feedback")
    parser.add_argument("--show-config", action="store_true",
                        help="print the effective default configuration and exit")
    sub = parser.add_subparsers(dest="command")

    p = sub.add_parser("pipeline", help="run the frame loop over images")
    p.add_argument("--input", required=True)
    p.add_argument("--output", default="out/pipeline")
    p.add_argument("--config")
    p.add_argument("--calibration")
    p.add_argument("--ocr", default="template")
    p.add_argument("--debug", action="store_true")
    p.set_defaults(fn=cmd_pipeline)

    p = sub.add_parser("experiment", help="run seeded tracking simulations")
    p.add_argument("--feedback", choices=("on", "off"), default="on")
    p.add_argument("--reps", type=int, default=25)
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--source", choices=("vision", "oracle"), default="vision")
    p.add_argument("--params", help="calibrated finger-model JSON")
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--plots", action="store_true")
    p.add_argument("--output", default="out/experiment")
    p.set_defaults(fn=cmd_experiment)

    p = sub.add_parser("calibrate", help="calibrate the finger model")
    p.add_argument("--seed", type=int, default=7)
    p.add_argument("--reps", type=int, default=12)
    p.add_argument("--output", default="out/calibration")
    p.set_defaults(fn=cmd_calibrate)

    p = sub.add_parser("serve", help="start the session service")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8377)
    p.add_argument("--config")
    p.add_argument("--ui-dir", default="frontend/dist")
    p.set_defaults(fn=cmd_serve)

    p = sub.add_parser("braille", help="translate text to dot patterns")
    p.add_argument("--text", required=True)
    p.add_argument("--dialect", choices=("Six", "Eight"), default="Six")
    p.add_argument("--waveform", help="also export a stimulation CSV to this path")
    p.add_argument("--cell-duration", type=float, default=0.5)
    p.set_defaults(fn=cmd_braille)

    p = sub.add_parser("metrics", help="recompute metrics from logs")
    p.add_argument("logs", nargs="+")
    p.add_argument("--metadata", help="JSON metadata for CSV logs")
    p.set_defaults(fn=cmd_metrics)

    p = sub.add_parser("benchmark", help="measure pipeline throughput")
    p.add_argument("--frames", type=int, default=30)
    p.add_argument("--width", type=int, default=640)
    p.add_argument("--height", type=int, default=480)
    p.set_defaults(fn=cmd_benchmark)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.show_config:
        from optobraille.harness.config import PipelineConfig

        print(json.dumps(PipelineConfig().as_dict(), indent=2, sort_keys=True))
        return 0
    if not getattr(args, "command", None):
        parser.print_help()
        return 2
    try:
        return args.fn(args)
    except KeyboardInterrupt:
        return 1
    except Exception as exc:
        return _error(f"{type(exc).__name__}: {exc}")


if __name__ == "__main__":
    sys.exit(main())
