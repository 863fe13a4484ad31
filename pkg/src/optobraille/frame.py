"""Raster frame type shared by every pipeline stage.

Pixel data is float in [0, 1], shape (H, W) for grayscale or (H, W, 3)
for RGB. Loaders normalize 8-bit input; writers quantize back.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class Frame:
    """An image with a timestamp (seconds)."""

    data: np.ndarray
    t: float = 0.0

    def __post_init__(self):
        if self.data.ndim not in (2, 3):
            raise ValueError(f"frame data must be 2-D or 3-D, got shape {self.data.shape}")
        if self.data.ndim == 3 and self.data.shape[2] != 3:
            raise ValueError("color frames must have 3 channels")

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    @property
    def is_color(self) -> bool:
        return self.data.ndim == 3

    def gray(self) -> "Frame":
        """Luma (Rec. 601) view of the frame; no-op when already grayscale."""
        if not self.is_color:
            return self
        g = self.data @ np.array([0.299, 0.587, 0.114])
        return Frame(g, self.t)

    def with_time(self, t: float) -> "Frame":
        return Frame(self.data, t)

    @staticmethod
    def from_uint8(arr: np.ndarray, t: float = 0.0) -> "Frame":
        return Frame(arr.astype(np.float64) / 255.0, t)

    def to_uint8(self) -> np.ndarray:
        return np.clip(np.round(self.data * 255.0), 0, 255).astype(np.uint8)


def as_array(image) -> np.ndarray:
    """Pixel array of a Frame, or the input coerced to an ndarray."""
    if isinstance(image, Frame):
        return image.data
    return np.asarray(image)


def load_image(path) -> Frame:
    """Read a PNG/JPEG file into a Frame."""
    from PIL import Image

    img = Image.open(path)
    if img.mode not in ("L", "RGB"):
        img = img.convert("RGB")
    return Frame.from_uint8(np.asarray(img))


def save_image(frame: Frame, path) -> None:
    from PIL import Image

    Image.fromarray(frame.to_uint8()).save(path)
