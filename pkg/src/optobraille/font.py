"""Embedded bitmap font used by the page renderer and the built-in OCR.

Glyphs are 5x9 monospace bitmaps: rows 0-6 above the baseline (cap height
7 rows), rows 7-8 the descender zone. Rendering scales a glyph so its cap
zone spans a requested pixel height (nearest-neighbor, deterministic).
"""

from __future__ import annotations

from functools import lru_cache
from importlib import resources

import numpy as np

GLYPH_WIDTH = 5
GLYPH_ROWS = 9
CAP_ROWS = 7  # rows above the baseline


def _parse_font(text: str) -> dict[str, np.ndarray]:
    glyphs: dict[str, np.ndarray] = {}
    # comment lines start with "# "; glyph rows are 5 chars of [#.]
    lines = [ln for ln in text.splitlines() if ln and not ln.startswith("# ")]
    i = 0
    while i < len(lines):
        header = lines[i]
        if not header.startswith("char "):
            raise ValueError(f"bad font block header: {header!r}")
        name = header[5:]
        ch = " " if name == "space" else name
        rows = lines[i + 1:i + 1 + GLYPH_ROWS]
        if len(rows) != GLYPH_ROWS or any(len(r) != GLYPH_WIDTH for r in rows):
            raise ValueError(f"glyph {ch!r} must be {GLYPH_WIDTH}x{GLYPH_ROWS}")
        glyphs[ch] = np.array([[c == "#" for c in r] for r in rows], dtype=bool)
        i += 1 + GLYPH_ROWS
    return glyphs


@lru_cache(maxsize=1)
def load_glyphs() -> dict[str, np.ndarray]:
    text = resources.files("optobraille.fontdata").joinpath("glyphs5x9.txt").read_text()
    return _parse_font(text)


def supported_chars() -> str:
    return "".join(sorted(load_glyphs().keys()))


def scaled_glyph(ch: str, cap_height_px: int) -> np.ndarray:
    """Glyph bitmap scaled so the cap zone is `cap_height_px` rows tall.

    Returns a bool array of shape (round(9/7 * cap), round(5/7 * cap)).
    """
    glyphs = load_glyphs()
    if ch not in glyphs:
        raise KeyError(f"no glyph for {ch!r}")
    scale = cap_height_px / CAP_ROWS
    out_h = int(round(GLYPH_ROWS * scale))
    out_w = int(round(GLYPH_WIDTH * scale))
    src_rows = np.minimum((np.arange(out_h) / scale).astype(int), GLYPH_ROWS - 1)
    src_cols = np.minimum((np.arange(out_w) / scale).astype(int), GLYPH_WIDTH - 1)
    return glyphs[ch][np.ix_(src_rows, src_cols)]


def glyph_advance(cap_height_px: int) -> int:
    """Horizontal advance per character: glyph width plus one column gap."""
    scale = cap_height_px / CAP_ROWS
    return int(round(GLYPH_WIDTH * scale)) + max(1, int(round(scale)))


def render_text(text: str, cap_height_px: int) -> np.ndarray:
    """Render a text string as an ink mask (True = ink).

    The output has round(9/7 * cap) rows; the baseline sits after row
    round(7/7 * cap) - 1. Unknown characters raise KeyError.
    """
    adv = glyph_advance(cap_height_px)
    scale = cap_height_px / CAP_ROWS
    h = int(round(GLYPH_ROWS * scale))
    w = max(1, adv * len(text))
    out = np.zeros((h, w), dtype=bool)
    x = 0
    for ch in text:
        g = scaled_glyph(ch, cap_height_px)
        out[: g.shape[0], x: x + g.shape[1]] |= g
        x += adv
    return out
