"""Exception types raised across the toolkit."""


class OptoBrailleError(Exception):
    """Base class for all toolkit errors."""


class PointBehindCamera(OptoBrailleError):
    """Projection requested for a point with non-positive camera-frame z."""


class DegenerateConfiguration(OptoBrailleError):
    """Control points are collinear or otherwise rank-deficient."""


class NoLinesFound(OptoBrailleError):
    """Fewer than two qualifying line segments in the frame."""


class NoDeviceFound(OptoBrailleError):
    """No finger device blob of sufficient area in the frame."""


class NoLineAboveFinger(OptoBrailleError):
    """No text-line region lies fully above the fingertip."""


class EngineFailure(OptoBrailleError):
    """Wraps an OCR-engine-specific failure."""


class UnsupportedCharacter(OptoBrailleError):
    """Character outside the Braille table for the selected dialect."""


class UnknownCell(OptoBrailleError):
    """Braille cell with no table entry for the selected dialect."""


class OverlappingLines(OptoBrailleError):
    """Baseline requested for two line regions that vertically overlap."""


class DegenerateGeometry(OptoBrailleError):
    """Geometry with no defined answer (zero denominators, collinear sets)."""


class InsufficientPoints(OptoBrailleError):
    """Too few tracked points for the requested fit."""


class TextOverflow(OptoBrailleError):
    """A rendered text line exceeds the page width."""


class PipelineStall(OptoBrailleError):
    """The vision pipeline found no lines for too long during a run."""


class CalibrationFailed(OptoBrailleError):
    """Finger-model calibration could not reach its targets."""

    def __init__(self, message, best_params=None, achieved=None):
        super().__init__(message)
        self.best_params = best_params
        self.achieved = achieved
