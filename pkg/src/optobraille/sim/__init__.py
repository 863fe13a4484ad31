"""Synthetic closed-loop testbed: page, camera, finger model, metrics."""

from optobraille.sim.page import DEFAULT_TEXT, PageLayout, render_page
from optobraille.sim.camera import SimCamera, SimCameraConfig

__all__ = [
    "DEFAULT_TEXT",
    "PageLayout",
    "render_page",
    "SimCamera",
    "SimCameraConfig",
]
