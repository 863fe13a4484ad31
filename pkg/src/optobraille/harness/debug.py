"""Debug overlay dumps: detections drawn into a PNG plus a JSON sidecar."""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from optobraille.frame import Frame, save_image


def _draw_rect(rgb: np.ndarray, x0, y0, x1, y1, color):
    h, w = rgb.shape[:2]
    x0, x1 = int(max(0, x0)), int(min(w - 1, x1))
    y0, y1 = int(max(0, y0)), int(min(h - 1, y1))
    rgb[y0, x0:x1 + 1] = color
    rgb[y1, x0:x1 + 1] = color
    rgb[y0:y1 + 1, x0] = color
    rgb[y0:y1 + 1, x1] = color


def dump_overlay(frame: Frame, diagnostics: dict, path) -> None:
    rgb = frame.data.copy()
    if rgb.ndim == 2:
        rgb = np.repeat(rgb[..., None], 3, axis=2)

    for box in diagnostics.get("lines", []):
        _draw_rect(rgb, *box, color=(0.1, 0.7, 0.1))
    if "word_bbox" in diagnostics:
        _draw_rect(rgb, *diagnostics["word_bbox"], color=(0.9, 0.4, 0.1))
    tip = diagnostics.get("tip")
    if tip:
        x, y = int(tip[0]), int(tip[1])
        h, w = rgb.shape[:2]
        rgb[max(0, y - 4): y + 5, max(0, x)] = (0.9, 0.1, 0.1)
        rgb[max(0, y), max(0, x - 4): x + 5] = (0.9, 0.1, 0.1)

    save_image(Frame(np.clip(rgb, 0, 1)), path)
    sidecar = Path(path).with_suffix(".json")
    safe = {k: v for k, v in diagnostics.items() if not k.startswith("_")}
    sidecar.write_text(json.dumps(safe, indent=2, sort_keys=True, default=str))
