"""Text-versus-camera motion estimation."""

from optobraille.motion.features import detect_features
from optobraille.motion.flow import FlowField, FlowPoint, track_flow
from optobraille.motion.affine import AffineMotion, estimate_motion

__all__ = [
    "detect_features",
    "FlowField",
    "FlowPoint",
    "track_flow",
    "AffineMotion",
    "estimate_motion",
]
