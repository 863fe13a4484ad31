"""Word recognition engines.

TemplateMatcherOcr is the hermetic built-in: it binarizes the crop,
segments glyphs at vertical-projection valleys, and matches each glyph
against the embedded font by normalized cross-correlation. An external
command adapter is available for full OCR engines; it is never used by
the test suite's golden paths.
"""

from __future__ import annotations

import shlex
import subprocess
import tempfile
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.ndimage import gaussian_filter

from optobraille import font
from optobraille.errors import EngineFailure
from optobraille.geometry import Rect
from optobraille.imageops import bilinear_sample, otsu_threshold
from optobraille.page.words import WordCrop

CANON = 24  # canonical square patch size for glyph matching
DEFAULT_CHARSET = "abcdefghijklmnopqrstuvwxyz0123456789"


@dataclass(frozen=True)
class OcrResult:
    text: str
    confidence: float
    per_char_boxes: tuple[Rect, ...] = field(default_factory=tuple)


def _normalize_patch(mask: np.ndarray) -> np.ndarray | None:
    """Crop a glyph mask to its ink bbox and resample to CANON x CANON
    (bilinear), zero-mean and unit-norm for correlation."""
    ys, xs = np.nonzero(mask)
    if len(ys) == 0:
        return None
    sub = mask[ys.min(): ys.max() + 1, xs.min(): xs.max() + 1].astype(np.float64)
    h, w = sub.shape
    ry = np.linspace(0, h - 1, CANON)
    rx = np.linspace(0, w - 1, CANON)
    out = bilinear_sample(sub, rx[None, :].repeat(CANON, 0), ry[:, None].repeat(CANON, 1), fill=0.0)
    # slight blur absorbs sub-pixel stroke misalignment between scales
    out = gaussian_filter(out, 0.8)
    out = out - out.mean()
    norm = np.sqrt((out ** 2).sum())
    return out / norm if norm > 0 else None


TEMPLATE_CAPS = (13, 15, 17, 19, 21, 24, 27, 31)


@lru_cache(maxsize=4)
def _templates(charset: str) -> dict[str, list[np.ndarray]]:
    """Per-character normalized patches at several rendering scales; the
    matcher takes the best scale, which absorbs rasterization differences
    between the crop's size and any single template size."""
    temps: dict[str, list[np.ndarray]] = {}
    for ch in charset:
        variants = []
        for cap in TEMPLATE_CAPS:
            patch = _normalize_patch(font.render_text(ch, cap))
            if patch is not None:
                variants.append(patch)
        if variants:
            temps[ch] = variants
    return temps


def _split_glyphs(ink: np.ndarray) -> list[tuple[int, int]]:
    """Column ranges of glyphs separated by empty-column valleys."""
    col_ink = ink.any(axis=0)
    ranges = []
    start = None
    for x, has in enumerate(col_ink):
        if has and start is None:
            start = x
        elif not has and start is not None:
            ranges.append((start, x))
            start = None
    if start is not None:
        ranges.append((start, len(col_ink)))
    return ranges


class TemplateMatcherOcr:
    """Correlation matcher over the embedded font; deterministic and safe
    for concurrent calls."""

    name = "template"

    def __init__(self, charset: str = DEFAULT_CHARSET):
        self.charset = charset

    def recognize(self, crop: WordCrop) -> OcrResult:
        gray = np.asarray(crop.gray_patch, dtype=np.float64)
        if gray.size == 0:
            return OcrResult("", 0.0)
        t = otsu_threshold(gray)
        ink = gray <= t
        frac = float(ink.mean())
        if frac < 0.005 or frac > 0.85:
            # blank or saturated patch: nothing readable
            return OcrResult("", 0.0)

        temps = _templates(self.charset)
        chars = []
        scores = []
        boxes = []
        for x0, x1 in _split_glyphs(ink):
            glyph = ink[:, x0:x1]
            patch = _normalize_patch(glyph)
            if patch is None:
                continue
            best_ch, best_score = "", -1.0
            for ch, variants in temps.items():
                score = max(float((patch * temp).sum()) for temp in variants)
                if score > best_score:
                    best_ch, best_score = ch, score
            chars.append(best_ch)
            scores.append(max(0.0, best_score))
            ys = np.nonzero(glyph.any(axis=1))[0]
            boxes.append(Rect(crop.bbox.x0 + x0, crop.bbox.y0 + float(ys.min()),
                              crop.bbox.x0 + x1 - 1, crop.bbox.y0 + float(ys.max())))
        if not chars:
            return OcrResult("", 0.0)
        return OcrResult("".join(chars), float(np.mean(scores)), tuple(boxes))


class ExternalProcessOcr:
    """Adapter spawning an external OCR command on a temp PNG of the crop.

    The command receives the image path as its final argument and must
    print the recognized text on stdout. Calls are serialized.
    """

    name = "external"

    def __init__(self, command: str, timeout: float = 10.0):
        self.command = shlex.split(command)
        self.timeout = timeout
        self._lock = threading.Lock()

    def recognize(self, crop: WordCrop) -> OcrResult:
        from PIL import Image

        with self._lock:
            try:
                with tempfile.NamedTemporaryFile(suffix=".png") as tmp:
                    arr = np.clip(np.round(crop.gray_patch * 255), 0, 255).astype(np.uint8)
                    Image.fromarray(arr).save(tmp.name)
                    proc = subprocess.run(
                        self.command + [tmp.name],
                        capture_output=True, text=True, timeout=self.timeout,
                    )
            except (OSError, subprocess.SubprocessError) as exc:
                raise EngineFailure(f"external OCR failed: {exc}") from exc
        if proc.returncode != 0:
            raise EngineFailure(f"external OCR exited {proc.returncode}: {proc.stderr.strip()}")
        text = proc.stdout.strip()
        return OcrResult(text, 0.5 if text else 0.0)


def recognize_word(crop: WordCrop, engine) -> OcrResult:
    """Run the configured engine on a crop, wrapping engine errors."""
    if crop.gray_patch.size == 0:
        raise ValueError("empty crop")
    try:
        return engine.recognize(crop)
    except EngineFailure:
        raise
    except Exception as exc:
        raise EngineFailure(f"{getattr(engine, 'name', engine)!r} failed: {exc}") from exc
