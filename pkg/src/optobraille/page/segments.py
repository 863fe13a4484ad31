"""Line-segment detection on binary rasters via a probabilistic Hough
transform.

A random subset of the candidate points votes in an (angle, rho)
accumulator. The dominant direction is the angle whose rho profile has
maximal energy (the sharpest projection), refined by parabolic
interpolation; segments are then extracted at that angle by walking
inlier runs of the per-line rho peaks with a trimmed least-squares fit,
so the reported angles are not limited by the accumulator bin width.

Candidate points for text-like rasters are the bottom pixels of vertical
ink runs: glyphs and blobs share baselines, which keeps the profile
sharp.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class Segment:
    x0: float
    y0: float
    x1: float
    y1: float
    angle: float  # radians, inclination from the +x axis
    length: float
    support: int  # inlier point count


def run_bottom_points(binary: np.ndarray) -> np.ndarray:
    """(x, y) bottoms of vertical True-runs: the baseline point set."""
    b = np.asarray(binary, dtype=bool)
    below = np.zeros_like(b)
    below[:-1] = b[1:]
    bottoms = b & ~below
    ys, xs = np.nonzero(bottoms)
    return np.stack([xs, ys], axis=1).astype(np.float64)


def _vote_energy(pts: np.ndarray, angles: np.ndarray, rho_step: float) -> np.ndarray:
    """Per-angle energy of the rho vote profile."""
    energies = np.empty(len(angles))
    for i, a in enumerate(angles):
        rho = pts[:, 1] * np.cos(a) - pts[:, 0] * np.sin(a)
        bins = np.floor((rho - rho.min()) / rho_step).astype(np.int64)
        counts = np.bincount(bins)
        energies[i] = float((counts.astype(np.float64) ** 2).sum())
    return energies


def dominant_angle(pts: np.ndarray, *, max_angle_deg: float = 25.0,
                   coarse_step_deg: float = 0.5, fine_step_deg: float = 0.1,
                   rho_step: float = 1.0) -> float:
    """Angle (radians) maximizing the rho-profile energy, coarse-to-fine
    with a final parabolic refinement."""
    coarse = np.deg2rad(np.arange(-max_angle_deg, max_angle_deg + 1e-9, coarse_step_deg))
    e = _vote_energy(pts, coarse, rho_step)
    a0 = coarse[int(np.argmax(e))]

    fine = a0 + np.deg2rad(np.arange(-coarse_step_deg, coarse_step_deg + 1e-9, fine_step_deg))
    e = _vote_energy(pts, fine, rho_step)
    k = int(np.argmax(e))
    if 0 < k < len(fine) - 1:
        denom = e[k - 1] - 2 * e[k] + e[k + 1]
        if denom < 0:
            shift = 0.5 * (e[k - 1] - e[k + 1]) / denom
            return float(fine[k] + shift * np.deg2rad(fine_step_deg))
    return float(fine[k])


def detect_line_segments(
    binary: np.ndarray,
    *,
    sample_fraction: float = 0.2,
    max_angle_deg: float = 25.0,
    rho_step: float = 1.0,
    min_length: float | None = None,
    rho_tol: float = 3.0,
    gap_tol: float | None = None,
    min_support: int = 6,
    max_segments: int = 24,
    seed: int = 0,
) -> list[Segment]:
    """Detect near-horizontal segments in a binary raster, longest first.

    min_length defaults to 0.3x and gap_tol to 0.055x the raster width.
    Deterministic for a fixed seed (the random subset is the
    probabilistic part).
    """
    h, w = binary.shape
    if min_length is None:
        min_length = 0.3 * w
    if gap_tol is None:
        gap_tol = max(12.0, 0.055 * w)

    pts = run_bottom_points(binary)
    if len(pts) < 2 * min_support:
        return []

    rng = np.random.default_rng(seed)
    n_sample = max(2 * min_support, int(round(len(pts) * sample_fraction)))
    if n_sample < len(pts):
        idx = rng.choice(len(pts), size=n_sample, replace=False)
        sampled = pts[idx]
    else:
        sampled = pts

    a = dominant_angle(sampled, max_angle_deg=max_angle_deg, rho_step=rho_step)

    # per-line rho peaks at the dominant angle, over the full point set
    all_x, all_y = pts[:, 0], pts[:, 1]
    rho = all_y * np.cos(a) - all_x * np.sin(a)
    rho_min = float(rho.min())
    bins = np.floor((rho - rho_min) / rho_step).astype(np.int64)
    counts = np.bincount(bins).astype(np.float64)

    segments: list[Segment] = []
    work = counts.copy()
    for _ in range(max_segments * 2):
        peak = int(np.argmax(work))
        if work[peak] < min_support:
            break
        lo = max(0, peak - int(np.ceil(rho_tol / rho_step)))
        hi = peak + int(np.ceil(rho_tol / rho_step)) + 1
        work[lo:hi] = 0

        rho_c = rho_min + (peak + 0.5) * rho_step
        sel = np.abs(rho - rho_c) <= rho_tol
        if sel.sum() < min_support:
            continue
        xs, ys = all_x[sel], all_y[sel]

        # split into runs along the line direction
        t = xs * np.cos(a) + ys * np.sin(a)
        order = np.argsort(t)
        ts = t[order]
        start = 0
        for i in range(1, len(ts) + 1):
            if i < len(ts) and ts[i] - ts[i - 1] <= gap_tol:
                continue
            run = order[start:i]
            start = i
            if len(run) < min_support:
                continue
            rx, ry = xs[run], ys[run]
            if np.hypot(rx.max() - rx.min(), ry.max() - ry.min()) < min_length:
                continue
            # trimmed least-squares refinement (descender and punctuation
            # bottoms sit below the baseline)
            coeff = np.polyfit(rx, ry, 1)
            for _ in range(2):
                resid = ry - np.polyval(coeff, rx)
                keep = np.abs(resid - np.median(resid)) <= max(1.0, 1.5 * float(resid.std()))
                if keep.sum() < min_support or keep.all():
                    break
                rx, ry = rx[keep], ry[keep]
                coeff = np.polyfit(rx, ry, 1)
            xa, xb = float(rx.min()), float(rx.max())
            ya, yb = float(np.polyval(coeff, xa)), float(np.polyval(coeff, xb))
            segments.append(Segment(
                x0=xa, y0=ya, x1=xb, y1=yb,
                angle=float(np.arctan(coeff[0])),
                length=float(np.hypot(xb - xa, yb - ya)),
                support=int(len(rx)),
            ))
        if len(segments) >= max_segments:
            break

    segments.sort(key=lambda s: -s.length)
    return segments[:max_segments]
