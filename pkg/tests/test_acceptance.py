"""Acceptance suite: one test per release criterion, each printing a
PASS/FAIL line (run with `pytest -s tests/test_acceptance.py` to watch).

The human-subject tracking results are reproduced by the simulator with
calibrated finger-model parameters; everything else is checked directly
at its stated tolerance.
"""

import json
import sys
import time

import numpy as np
import pytest

from optobraille.sim.calibrate import calibrate_finger_model
from optobraille.sim.experiment import ExperimentConfig, run_experiment
from optobraille.sim.metrics import compute_metrics

SEED = 7
REPS = 25


def report(name: str, ok: bool, detail: str):
    line = f"ACCEPTANCE {name}: {'PASS' if ok else 'FAIL'} ({detail})"
    print(line, file=sys.stderr)
    assert ok, line


@pytest.fixture(scope="module")
def calibrated():
    params, rep = calibrate_finger_model(seed=SEED)
    return params


@pytest.fixture(scope="module")
def closed_run(calibrated):
    cfg = ExperimentConfig(finger=calibrated, feedback_on=True, repetitions=REPS,
                           seed=SEED, feedback_source="vision")
    t0 = time.perf_counter()
    logs = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    return logs, compute_metrics(logs), elapsed


@pytest.fixture(scope="module")
def open_run(calibrated):
    cfg = ExperimentConfig(finger=calibrated, feedback_on=False, repetitions=REPS,
                           seed=SEED, feedback_source="vision")
    t0 = time.perf_counter()
    logs = run_experiment(cfg)
    elapsed = time.perf_counter() - t0
    return logs, compute_metrics(logs), elapsed


def test_closed_loop_containment(closed_run):
    logs, m, elapsed = closed_run
    ok = (m.containment_2mm_fraction >= 0.95
          and m.std_offset_mm <= 1.5
          and abs(m.mean_offset_mm) <= 0.3
          and elapsed <= 120.0)
    report("closed-loop-containment", ok,
           f"containment {m.containment_2mm_fraction:.4f} (>=0.95), "
           f"std {m.std_offset_mm:.3f} mm (<=1.5), "
           f"mean {m.mean_offset_mm:+.3f} mm (|.|<=0.3), runtime {elapsed:.0f}s (<=120)")


def test_open_loop_drift(open_run):
    logs, m, elapsed = open_run
    peak = max(float(np.max(m.max_envelope_mm)), float(-np.min(m.min_envelope_mm)))
    ok = m.mean_end_drift_mm > 6.0 and peak >= 15.0 and elapsed <= 60.0
    report("open-loop-drift", ok,
           f"mean end drift {m.mean_end_drift_mm:.2f} mm (>6), "
           f"max envelope {peak:.2f} mm (>=15), runtime {elapsed:.0f}s (<=60)")


def test_speed_reproduction(closed_run, open_run):
    closed_logs, mc, _ = closed_run
    open_logs, mo, _ = open_run
    open_ok = abs(mo.avg_speed_mm_per_s - 18.21) <= 1.8
    closed_ok = abs(mc.avg_speed_mm_per_s - 4.87) <= 0.5
    per_seed = all(c < o for c, o in zip(mc.per_run_speed_mm_per_s, mo.per_run_speed_mm_per_s))

    # every command burst is followed by a speed minimum within one
    # compliance duration
    bursts_ok = True
    for log in closed_logs:
        t, x = log.t, log.x_mm
        vx = np.gradient(x) / np.maximum(np.gradient(t), 1e-9)
        win = max(1, int(0.2 / max(np.median(np.diff(t)), 1e-6)))
        smooth = np.convolve(vx, np.ones(win) / win, mode="same")
        for ev in log.commands:
            if ev.kind not in ("Up", "Down"):
                continue
            sel = (t >= ev.t) & (t <= ev.t + 2.3)
            if sel.sum() and float(smooth[sel].min()) > 0.5 * 18.21:
                bursts_ok = False
    ok = open_ok and closed_ok and per_seed and bursts_ok
    report("speed-reproduction", ok,
           f"open {mo.avg_speed_mm_per_s:.2f} (18.21+-1.8), "
           f"closed {mc.avg_speed_mm_per_s:.2f} (4.87+-0.5), "
           f"closed<open per seed {per_seed}, burst slowdown {bursts_ok}")


def test_reaction_time_statistics(closed_run):
    _, m, _ = closed_run
    reactions = np.array(m.reaction_times_s)
    compliance = np.array(m.compliance_durations_s)
    median = float(np.median(reactions))
    ok = (0.6 <= median <= 0.9
          and reactions.min() <= 0.166
          and reactions.max() >= 1.34
          and abs(float(np.mean(compliance)) - 2.0) <= 0.3)
    report("reaction-time-statistics", ok,
           f"median {median:.3f}s (in [0.6,0.9]), "
           f"range [{reactions.min():.3f}, {reactions.max():.3f}] (covers [0.166,1.34]), "
           f"compliance mean {np.mean(compliance):.2f}s (2.0+-0.3), n={len(reactions)}")


def test_feedback_strength_property_suite():
    from optobraille.feedback.law import BaselineGeometry, feedback_strength

    rng = np.random.default_rng(123)
    t0 = time.perf_counter()
    ok = True
    for _ in range(10_000):
        d1, d2 = rng.uniform(0.01, 100.0, size=2)
        d3 = rng.uniform(0.0, 100.0)
        above = bool(rng.integers(2))
        s = feedback_strength(BaselineGeometry(d1, d2, d3, above))
        ok &= abs(s) <= 1.0
        ok &= (s == 0.0) == (d3 == 0.0)
        if d3 > 0:
            ok &= (s > 0) == above
        c = rng.uniform(0.1, 10.0)
        ok &= abs(feedback_strength(BaselineGeometry(c * d1, c * d2, c * d3, above)) - s) < 1e-12
        ok &= abs(feedback_strength(BaselineGeometry(d1, d2, d3 + 0.5, above))) > abs(s)
    exact = feedback_strength(BaselineGeometry(3.5, 3.5, 2.0, True))
    ok &= abs(exact - 2.0 / 5.5) < 1e-12
    report("feedback-strength-properties", ok,
           f"10000 geometries, exact value {exact:.6f} == 2/5.5, "
           f"runtime {time.perf_counter() - t0:.1f}s")


def test_vision_oracles():
    from optobraille.frame import Frame
    from optobraille.imageops import rotate_image
    from optobraille.page import cluster_text_lines, detect_corners, detect_fingertip, detect_skew
    from optobraille.sim import PageLayout, SimCamera, SimCameraConfig, render_page

    detail = []
    ok = True

    # skew within +-0.5 deg over a +-10 deg grid
    layout3 = PageLayout(text=("the quick brown fox jumps over a lazy dog",) * 3)
    region = render_page(layout3, 4.0).data[140:260, 80:560]
    worst = 0.0
    for deg in range(-10, 11, 2):
        est = detect_skew(Frame(rotate_image(region, np.radians(deg), fill=1.0)))
        worst = max(worst, abs(np.degrees(est) - deg))
    ok &= worst <= 0.5
    detail.append(f"skew worst {worst:.3f} deg (<=0.5)")

    # fingertip apex within 2 px end to end through the synthetic camera
    layout = PageLayout()
    page = render_page(layout, 8.0)
    camera = SimCamera(SimCameraConfig())
    tip_err = 0.0
    for x_mm in (60.0, 110.0, 150.0):
        rect = camera.undistort(camera.capture(page, 8.0, x_mm, layout.gap_baseline_y_mm(0)))
        tip = detect_fingertip(rect)
        expect = camera.finger_pixel()
        tip_err = max(tip_err, abs(tip.x - expect[0]), abs(tip.y - expect[1]))
    ok &= tip_err <= 2.0
    detail.append(f"fingertip err {tip_err:.2f} px (<=2)")

    # exact line count on the 3-line corpus under rotation
    region8 = render_page(layout3, 8.0).data[240:560, 140:1060]
    counts_ok = True
    for deg in (-10, -5, 0, 5, 10):
        rot = rotate_image(region8, np.radians(deg), fill=1.0)
        regions = cluster_text_lines(detect_corners(Frame(rot)), rot.shape, pitch_px=80.0)
        counts_ok &= len(regions) == 3
    ok &= counts_ok
    detail.append(f"line count exact {counts_ok}")

    # LK translation within 0.1 px for shifts <= 3 px
    from optobraille.font import render_text
    from optobraille.motion import detect_features, estimate_motion, track_flow
    from optobraille.motion.flow import FlowField, FlowPoint

    img = np.ones((120, 160))
    for i, line in enumerate(["the quick", "fox jumps", "lazy dogs"]):
        mask = render_text(line, 14)
        img[12 + i * 34: 12 + i * 34 + mask.shape[0], 12: 12 + mask.shape[1]][mask] = 0.0
    pts = detect_features(Frame(img), 40)
    lk_worst = 0.0
    for shift in [(1, 0), (2, 0), (3, 0), (0, 2), (2, 2), (-3, -1)]:
        shifted = np.roll(img, (shift[1], shift[0]), axis=(0, 1))
        src, dst = track_flow(img, shifted, pts, pyramid_levels=3).tracked_arrays()
        lk_worst = max(lk_worst, float(np.max(np.abs((dst - src).mean(axis=0) - shift))))
    ok &= lk_worst <= 0.1
    detail.append(f"LK worst {lk_worst:.4f} px (<=0.1)")

    # affine recovery within 1e-6 on exact data
    rng = np.random.default_rng(5)
    src = rng.uniform(0, 100, size=(20, 2))
    ang = np.radians(8)
    R = np.array([[np.cos(ang), -np.sin(ang)], [np.sin(ang), np.cos(ang)]])
    dst = src @ R.T + np.array([2.0, 5.0])
    field = FlowField(tuple(FlowPoint(tuple(s), tuple(d), True) for s, d in zip(src, dst)), 1.0)
    motion = estimate_motion(field)
    aff_err = max(float(np.max(np.abs(motion.A - R))), float(np.max(np.abs(motion.b - [2, 5]))))
    ok &= aff_err <= 1e-6
    detail.append(f"affine err {aff_err:.2e} (<=1e-6)")

    # TPS interpolation at lambda=0 within 1e-8
    from optobraille.imaging import fit_tps, transform_points

    src_pts = rng.uniform(0, 100, size=(8, 2))
    dst_pts = src_pts + rng.normal(scale=4.0, size=(8, 2))
    warp = fit_tps(list(zip(src_pts, dst_pts)), 0.0)
    tps_err = float(np.max(np.abs(transform_points(warp, src_pts) - dst_pts)))
    ok &= tps_err <= 1e-8
    detail.append(f"TPS err {tps_err:.2e} (<=1e-8)")

    # fisheye scalar oracle within 1e-9
    import math

    from optobraille.imaging import CameraIntrinsics, FisheyeDistortion, RigidPose, project_fisheye

    fe_err = 0.0
    for _ in range(100):
        intr = CameraIntrinsics(*rng.uniform(80, 400, size=2), *rng.uniform(-50, 50, size=2))
        ks = rng.uniform(-0.2, 0.2, size=4)
        p = rng.normal(size=3)
        p[2] = abs(p[2]) + 0.5
        u, v = project_fisheye(p, RigidPose.identity(), intr, FisheyeDistortion(*ks))
        xp, yp = p[0] / p[2], p[1] / p[2]
        r = math.hypot(xp, yp)
        th = math.atan(r)
        thp = th * (1 + ks[0] * th ** 2 + ks[1] * th ** 4 + ks[2] * th ** 6 + ks[3] * th ** 8)
        fe_err = max(fe_err, abs(u - (intr.fx * thp / r * xp + intr.cx)),
                     abs(v - (intr.fy * thp / r * yp + intr.cy)))
    ok &= fe_err <= 1e-9
    detail.append(f"fisheye err {fe_err:.2e} (<=1e-9)")

    # blind deconvolution >= 3 dB on the 5x5 Gaussian case, monotone objective
    from optobraille.imageops import psnr
    from optobraille.imaging.deblur import DeconvConfig, Psf, blind_deconvolve, conv_circular

    timg = np.ones((128, 128))
    for i, line in enumerate(["the quick brown", "fox jumps over", "a lazy dog and", "reads braille"]):
        mask = render_text(line, 14)
        cols = min(mask.shape[1], 116)
        timg[10 + i * 28: 10 + i * 28 + mask.shape[0], 6: 6 + cols][mask[:, :cols]] = 0.0
    blurred = conv_circular(timg, Psf.gaussian(5, 1.0).kernel)
    result = blind_deconvolve(Frame(blurred), DeconvConfig(psf_size=7))
    gain = psnr(timg, result.frame.data) - psnr(timg, blurred)
    hist = np.array(result.objective_history)
    monotone = bool(np.all(np.diff(hist) <= 1e-9 * np.maximum(np.abs(hist[:-1]), 1.0)))
    ok &= gain >= 3.0 and monotone
    detail.append(f"deconv gain {gain:.2f} dB (>=3), monotone {monotone}")

    report("vision-oracles", ok, "; ".join(detail))


def test_braille_and_waveform():
    from optobraille.ebraille import (
        Dialect,
        StimulationParams,
        compose_frame,
        decode_cell,
        encode_char,
        schedule_stimulation,
        simulate_regulation,
        supported_charset,
    )
    from optobraille.feedback.commands import CommandKind, FeedbackCommand

    detail = []
    ok = True

    # encode/decode bijection over the full charset per dialect
    bijection = True
    for dialect in (Dialect.SIX, Dialect.EIGHT):
        seen = set()
        for ch in supported_charset(dialect):
            cell = encode_char(ch, dialect)
            bijection &= cell.dots not in seen
            seen.add(cell.dots)
            bijection &= decode_cell(cell, dialect) == ch
    ok &= bijection
    detail.append(f"bijection {bijection}")

    # 30 Hz / 10% duty verified per dot to 1e-9 relative
    params = StimulationParams()
    frame = compose_frame(encode_char("q", Dialect.SIX),
                          FeedbackCommand(CommandKind.DOWN, 0.7))
    sched = schedule_stimulation(frame, params, duration=2.0, strength=0.7)
    period = 1.0 / params.frequency_hz
    duty_ok = all(abs((ev.t_off - ev.t_on) / period - params.duty_cycle) <= 1e-9 * params.duty_cycle
                  for ev in sched.events)
    ok &= duty_ok and len(sched.events) > 0
    detail.append(f"duty cycle to 1e-9 {duty_ok}")

    # current regulation: 30 +- 1 uA within 20 steps on loads in [2, 3.3] MOhm
    reg_ok = True
    for load in (2.0, 2.4, 2.8, 3.3):
        _, history = simulate_regulation(load, StimulationParams(voltage_v=60.0), max_steps=20)
        reg_ok &= abs(history[-1] - 30.0) <= 1.0
    ok &= reg_ok
    detail.append(f"regulation converges {reg_ok}")

    report("braille-waveform", ok, "; ".join(detail))


def test_throughput():
    from optobraille.harness.config import PipelineConfig
    from optobraille.harness.pipeline import PipelineSession
    from optobraille.sim import PageLayout, SimCamera, SimCameraConfig, render_page

    cam_cfg = SimCameraConfig(width=640, height=480, focal_px=480.0)
    camera = SimCamera(cam_cfg)
    layout = PageLayout()
    page = render_page(layout, 8.0)
    session = PipelineSession(PipelineConfig(line_pitch_px=10.0 * cam_cfg.px_per_mm))

    frames = [camera.capture(page, 8.0, 40.0 + i * 1.5, layout.gap_baseline_y_mm(0), t=i / 3.0)
              for i in range(15)]
    session.step(frames[0])  # warm-up outside the timed window
    t0 = time.perf_counter()
    for frame in frames:
        session.step(frame)
    fps = len(frames) / (time.perf_counter() - t0)
    report("throughput", fps >= 2.0, f"{fps:.2f} fps at 640x480 (>=2)")


def test_determinism(calibrated):
    from optobraille.harness.logs import command_records, trajectory_records

    cfg = ExperimentConfig(finger=calibrated, feedback_on=True, repetitions=2,
                           seed=11, feedback_source="vision")

    def run_bytes():
        logs = run_experiment(cfg)
        payload = []
        for log in logs:
            payload.append(json.dumps({"metadata": log.metadata}, sort_keys=True))
            payload += [json.dumps(r, sort_keys=True) for r in trajectory_records(log)]
            payload += [json.dumps(r, sort_keys=True) for r in command_records(log)]
        metrics = json.dumps(compute_metrics(logs).as_dict(), sort_keys=True)
        return ("\n".join(payload) + metrics).encode()

    first = run_bytes()
    second = run_bytes()
    report("determinism", first == second,
           f"two identical-seed runs: {len(first)} bytes, byte-identical {first == second}")
