"""Pipeline loop, configuration, CLI, and the session service."""

from optobraille.harness.config import PipelineConfig, load_calibration_file
from optobraille.harness.pipeline import PipelineSession, PipelineStepResult

__all__ = [
    "PipelineConfig",
    "load_calibration_file",
    "PipelineSession",
    "PipelineStepResult",
]
