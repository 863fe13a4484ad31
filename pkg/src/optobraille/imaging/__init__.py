"""Geometric and photometric rectification of raw finger-camera frames."""

from optobraille.imaging.fisheye import (
    CameraIntrinsics,
    FisheyeDistortion,
    RigidPose,
    UndistortMap,
    distort_normalized,
    invert_distortion,
    project_fisheye,
    undistort_image,
)
from optobraille.imaging.tps import TpsWarp, apply_tps, fit_tps, transform_points
from optobraille.imaging.deblur import DeconvConfig, DeconvResult, Psf, blind_deconvolve

__all__ = [
    "CameraIntrinsics",
    "FisheyeDistortion",
    "RigidPose",
    "UndistortMap",
    "project_fisheye",
    "undistort_image",
    "distort_normalized",
    "invert_distortion",
    "TpsWarp",
    "fit_tps",
    "apply_tps",
    "transform_points",
    "Psf",
    "DeconvConfig",
    "DeconvResult",
    "blind_deconvolve",
]
