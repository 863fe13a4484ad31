"""Per-frame page understanding: skew, fingertip, lines, words, OCR."""

from optobraille.page.corners import detect_corners
from optobraille.page.fingertip import FingertipEstimate, detect_fingertip, segment_page
from optobraille.page.lines import LineRegion, cluster_text_lines, corners_to_blobs
from optobraille.page.ocr import (
    ExternalProcessOcr,
    OcrResult,
    TemplateMatcherOcr,
    recognize_word,
)
from optobraille.page.segments import Segment, detect_line_segments
from optobraille.page.skew import deskew, detect_skew
from optobraille.page.words import WordCrop, extract_focused_word, select_line_above

__all__ = [
    "detect_corners",
    "FingertipEstimate",
    "detect_fingertip",
    "segment_page",
    "LineRegion",
    "cluster_text_lines",
    "corners_to_blobs",
    "OcrResult",
    "TemplateMatcherOcr",
    "ExternalProcessOcr",
    "recognize_word",
    "Segment",
    "detect_line_segments",
    "detect_skew",
    "deskew",
    "WordCrop",
    "extract_focused_word",
    "select_line_above",
]
