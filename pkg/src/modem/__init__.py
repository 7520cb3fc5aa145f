"""Modulation alphabets, symbol sources and power calibration."""

from .alphabet import Family, ModulationAlphabet, make_alphabet, bit_labels
from .source import (
    Frame,
    draw_symbols,
    frame_from_indices,
    average_power,
    calibrate_gain,
    db_to_linear,
)

__all__ = [
    "Family",
    "ModulationAlphabet",
    "make_alphabet",
    "bit_labels",
    "Frame",
    "draw_symbols",
    "frame_from_indices",
    "average_power",
    "calibrate_gain",
    "db_to_linear",
]
