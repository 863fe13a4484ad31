"""Electro-Braille: cells, electrode frames, stimulation waveforms."""

from optobraille.ebraille.cells import (
    BrailleCell,
    Dialect,
    decode_cell,
    encode_char,
    encode_text,
    supported_charset,
)
from optobraille.ebraille.frames import (
    DOT_PITCH_X_MM,
    DOT_PITCH_Y_MM,
    ElectrodeFrame,
    command_patterns,
    compose_frame,
)
from optobraille.ebraille.waveform import (
    StimulationParams,
    WaveformEvent,
    WaveformSchedule,
    export_waveform_csv,
    regulate_current,
    schedule_stimulation,
    simulate_regulation,
    training_sequence,
)

__all__ = [
    "BrailleCell",
    "Dialect",
    "encode_char",
    "decode_cell",
    "encode_text",
    "supported_charset",
    "ElectrodeFrame",
    "compose_frame",
    "command_patterns",
    "DOT_PITCH_X_MM",
    "DOT_PITCH_Y_MM",
    "StimulationParams",
    "WaveformEvent",
    "WaveformSchedule",
    "schedule_stimulation",
    "training_sequence",
    "regulate_current",
    "simulate_regulation",
    "export_waveform_csv",
]
