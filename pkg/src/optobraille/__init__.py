"""Finger-camera text reading with electro-Braille feedback.

Subpackages:
    imaging   -- fisheye projection/undistortion, thin-plate-spline
                 flattening, blind deconvolution
    page      -- skew, fingertip, corner/text-line detection, word
                 extraction, OCR
    motion    -- sparse optical flow and affine motion estimation
    feedback  -- baseline geometry, feedback strength, command logic
    ebraille  -- Braille encoding, electrode frames, stimulation waveforms
    sim       -- synthetic page/camera/finger closed-loop testbed
    harness   -- pipeline loop, CLI, session service
"""

from optobraille.frame import Frame

__version__ = "0.1.0"

__all__ = ["Frame", "__version__"]
