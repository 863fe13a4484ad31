"""Character-to-Braille-cell translation.

Cells use standard dot numbering: 1-2-3-7 down the left column, 4-5-6-8
down the right; bit i-1 of the mask is dot i. The table ships as a data
file so the code set can be audited and swapped; encode/decode is a
bijection on the supported charset of each dialect.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources

from optobraille.errors import UnknownCell, UnsupportedCharacter


class Dialect(str, Enum):
    SIX = "Six"
    EIGHT = "Eight"


@dataclass(frozen=True)
class BrailleCell:
    dots: int  # 8-bit mask, bit i-1 = dot i

    def __post_init__(self):
        if not 0 <= self.dots <= 0xFF:
            raise ValueError("cell mask must fit in 8 bits")

    @staticmethod
    def from_dot_numbers(numbers) -> "BrailleCell":
        mask = 0
        for n in numbers:
            if not 1 <= int(n) <= 8:
                raise ValueError(f"dot number {n} out of range")
            mask |= 1 << (int(n) - 1)
        return BrailleCell(mask)

    def dot_numbers(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(8) if self.dots >> i & 1)

    def uses_extension_dots(self) -> bool:
        return bool(self.dots & 0b11000000)

    def __str__(self):
        nums = self.dot_numbers()
        return "-".join(map(str, nums)) if nums else "blank"


def _parse_table(text: str):
    base: dict[str, BrailleCell] = {}
    eight_only: dict[str, BrailleCell] = {}
    for line in text.splitlines():
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        code_hex, dots, tier = line.split()
        ch = chr(int(code_hex, 16))
        cell = BrailleCell(0) if dots == "-" else BrailleCell.from_dot_numbers(dots)
        if tier == "base":
            if cell.uses_extension_dots():
                raise ValueError(f"base-tier {ch!r} may not use dots 7/8")
            base[ch] = cell
        elif tier == "eight":
            eight_only[ch] = cell
        else:
            raise ValueError(f"unknown tier {tier!r}")
    return base, eight_only


@lru_cache(maxsize=1)
def _tables():
    text = resources.files("optobraille.ebraille.data").joinpath("braille_table.txt").read_text()
    base, eight_only = _parse_table(text)
    six = dict(base)
    eight = dict(base)
    eight.update(eight_only)
    for name, table in (("Six", six), ("Eight", eight)):
        inverse: dict[int, str] = {}
        for ch, cell in table.items():
            if cell.dots in inverse:
                raise ValueError(f"{name} table not bijective: {ch!r} collides with {inverse[cell.dots]!r}")
            inverse[cell.dots] = ch
    return {
        Dialect.SIX: (six, {c.dots: ch for ch, c in six.items()}),
        Dialect.EIGHT: (eight, {c.dots: ch for ch, c in eight.items()}),
    }


def supported_charset(dialect: Dialect) -> str:
    table, _ = _tables()[dialect]
    return "".join(sorted(table.keys()))


def encode_char(ch: str, dialect: Dialect = Dialect.SIX) -> BrailleCell:
    """Table lookup; raises UnsupportedCharacter outside the dialect's set."""
    if len(ch) != 1:
        raise ValueError("encode_char takes a single character")
    table, _ = _tables()[dialect]
    try:
        return table[ch]
    except KeyError:
        raise UnsupportedCharacter(f"{ch!r} not in the {dialect.value}-dot charset") from None


def decode_cell(cell: BrailleCell, dialect: Dialect = Dialect.SIX) -> str:
    """Exact inverse of encode_char; raises UnknownCell off-table."""
    _, inverse = _tables()[dialect]
    try:
        return inverse[cell.dots]
    except KeyError:
        raise UnknownCell(f"no {dialect.value}-dot character for cell {cell}") from None


def encode_text(text: str, dialect: Dialect = Dialect.SIX) -> list[BrailleCell]:
    return [encode_char(ch, dialect) for ch in text]
