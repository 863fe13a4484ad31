"""Static result figures: drift envelopes, offset histogram, speed
profile, and the command raster, rendered to image files."""

from __future__ import annotations

import numpy as np

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from optobraille.sim.experiment import TrajectoryLog  # noqa: E402
from optobraille.sim.metrics import MetricsReport  # noqa: E402


def plot_drift_envelope(logs: list[TrajectoryLog], metrics: MetricsReport,
                        path, title: str = "tracking envelope") -> None:
    fig, ax = plt.subplots(figsize=(8, 4))
    y0 = logs[0].metadata["line_center_y_mm"]
    for log in logs:
        ax.plot(log.x_mm, log.y_mm - y0, lw=0.5, color="tab:blue", alpha=0.35)
    ax.plot(metrics.envelope_x_mm, metrics.max_envelope_mm, "r-", lw=1.5, label="max")
    ax.plot(metrics.envelope_x_mm, metrics.min_envelope_mm, "g-", lw=1.5, label="min")
    ax.axhspan(-2, 2, color="gray", alpha=0.15, label="+-2 mm band")
    ax.set_xlabel("position along line (mm)")
    ax.set_ylabel("offset from line center (mm)")
    ax.set_title(title)
    ax.legend(loc="upper left", fontsize=8)
    ax.invert_yaxis()  # page-down positive, drawn downward
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_offset_histogram(logs: list[TrajectoryLog], path) -> None:
    y0 = logs[0].metadata["line_center_y_mm"]
    offsets = np.concatenate([log.y_mm - y0 for log in logs])
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(offsets, bins=60, color="tab:blue", edgecolor="black", lw=0.3)
    ax.axvline(float(offsets.mean()), color="red", lw=1.2,
               label=f"mean {offsets.mean():.2f} mm, std {offsets.std():.2f} mm")
    ax.set_xlabel("offset from line center (mm)")
    ax.set_ylabel("samples")
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_speed_profile(logs: list[TrajectoryLog], path, bin_mm: float = 5.0) -> None:
    x0, x1 = logs[0].metadata["line_span_mm"]
    bins = np.arange(x0, x1 + bin_mm, bin_mm)
    sums = np.zeros(len(bins) - 1)
    counts = np.zeros(len(bins) - 1)
    for log in logs:
        t, x = log.t, log.x_mm
        if len(t) < 3:
            continue
        v = np.gradient(x) / np.maximum(np.gradient(t), 1e-9)
        idx = np.clip(np.digitize(x, bins) - 1, 0, len(bins) - 2)
        np.add.at(sums, idx, v)
        np.add.at(counts, idx, 1)
    seen = counts > 0
    centers = 0.5 * (bins[:-1] + bins[1:])
    fig, ax = plt.subplots(figsize=(8, 3.5))
    ax.plot(centers[seen], sums[seen] / counts[seen], "b-")
    ax.set_xlabel("position along line (mm)")
    ax.set_ylabel("speed (mm/s)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def plot_command_raster(logs: list[TrajectoryLog], path) -> None:
    fig, ax = plt.subplots(figsize=(8, 3.5))
    colors = {"Up": "tab:blue", "Down": "tab:red", "NewLine": "black"}
    for row, log in enumerate(logs):
        for ev in log.commands:
            if ev.kind in colors:
                ax.plot([ev.t], [row], "|", color=colors[ev.kind], ms=8)
    ax.set_xlabel("time (s)")
    ax.set_ylabel("run")
    ax.set_title("command raster (blue Up, red Down)")
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def render_all(logs: list[TrajectoryLog], metrics: MetricsReport, out_dir) -> list[str]:
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    files = []
    for name, fn in [
        ("envelope.png", lambda p: plot_drift_envelope(logs, metrics, p)),
        ("histogram.png", lambda p: plot_offset_histogram(logs, p)),
        ("speed.png", lambda p: plot_speed_profile(logs, p)),
        ("commands.png", lambda p: plot_command_raster(logs, p)),
    ]:
        target = out / name
        fn(target)
        files.append(str(target))
    return files
