"""16-dot electrode frames: an 8-dot Braille cell flanked by two command
columns.

Bit layout of dots16: bits 0-7 are the Braille cell (dots 1-8), bits 8-11
the left command column L1..L4 top to bottom, bits 12-15 the right column
R1..R4. Character bits and command bits live in disjoint fields by
construction. Physical dot pitch: x 2.29 mm, y 2.54 mm.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import lru_cache
from importlib import resources

from optobraille.ebraille.cells import BrailleCell
from optobraille.feedback.commands import CommandKind, FeedbackCommand

DOT_PITCH_X_MM = 2.29
DOT_PITCH_Y_MM = 2.54

CENTER_MASK = 0x00FF
SIDE_MASK = 0xFF00

_SIDE_BITS = {f"L{i}": 8 + i - 1 for i in range(1, 5)}
_SIDE_BITS.update({f"R{i}": 12 + i - 1 for i in range(1, 5)})


@dataclass(frozen=True)
class ElectrodeFrame:
    dots16: int

    def __post_init__(self):
        if not 0 <= self.dots16 <= 0xFFFF:
            raise ValueError("frame mask must fit in 16 bits")

    @property
    def center_bits(self) -> int:
        return self.dots16 & CENTER_MASK

    @property
    def side_bits(self) -> int:
        return self.dots16 & SIDE_MASK

    def cell(self) -> BrailleCell:
        return BrailleCell(self.center_bits)

    def side_dot_names(self) -> tuple[str, ...]:
        return tuple(name for name, bit in sorted(_SIDE_BITS.items(), key=lambda kv: kv[1])
                     if self.dots16 >> bit & 1)

    def active_dot_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(16) if self.dots16 >> i & 1)


@lru_cache(maxsize=1)
def command_patterns() -> dict[str, int]:
    """Side-bit mask per command kind, loaded from the data file."""
    raw = json.loads(resources.files("optobraille.ebraille.data")
                     .joinpath("command_patterns.json").read_text())
    masks = {}
    for kind, names in raw.items():
        if kind.startswith("_"):
            continue
        mask = 0
        for name in names:
            mask |= 1 << _SIDE_BITS[name]
        masks[kind] = mask
    return masks


def compose_frame(cell: BrailleCell, cmd: FeedbackCommand | CommandKind) -> ElectrodeFrame:
    """Merge a character cell with a command's side-dot pattern."""
    kind = cmd.kind if isinstance(cmd, FeedbackCommand) else cmd
    side = command_patterns()[kind.value]
    return ElectrodeFrame((cell.dots & CENTER_MASK) | (side & SIDE_MASK))
