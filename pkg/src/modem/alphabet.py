"""
Modulation alphabets for the SIC toolkit.
Unipolar PAM, bipolar ASK and star-QAM point sets with natural-binary labels.
"""

from dataclasses import dataclass, replace
from enum import Enum
from typing import Union

import numpy as np

from src.errors import AlphabetError


class Family(Enum):
    """Supported modulation families."""
    PAM = "PAM"
    ASK = "ASK"
    SQAM = "SQAM"


@dataclass(frozen=True)
class ModulationAlphabet:
    """Unscaled point set plus the gain applied at modulation time."""
    family: Family
    M: int
    m: int
    symbols: np.ndarray
    gain: float = 1.0

    @property
    def points(self) -> np.ndarray:
        """Channel-input points (symbols times gain)."""
        return self.gain * self.symbols

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.symbols.imag == 0))

    @property
    def mean(self) -> complex:
        """Mean of the scaled points under the uniform distribution."""
        return complex(np.mean(self.points))

    @property
    def energy(self) -> float:
        """E|X|^2 of the scaled points under the uniform distribution."""
        return float(np.mean(np.abs(self.points) ** 2))

    @property
    def label(self) -> str:
        return f"{self.M}-{self.family.value}"

    def with_gain(self, gain: float) -> "ModulationAlphabet":
        return replace(self, gain=float(gain))

    def index_of(self, values: np.ndarray) -> np.ndarray:
        """Map scaled channel-input values back to symbol indices."""
        values = np.asarray(values)
        dist = np.abs(values[..., None] - self.points[None, :])
        return np.argmin(dist, axis=-1)


def _sqam_points(M: int) -> np.ndarray:
    # fixed order +a, -a, +ja, -ja for a = 1..M/4
    points = []
    for a in range(1, M // 4 + 1):
        points.extend([a, -a, 1j * a, -1j * a])
    return np.asarray(points, dtype=complex)


def make_alphabet(family: Union[Family, str], M: int) -> ModulationAlphabet:
    """Build the unscaled M-ary alphabet of the given family with gain 1.

    Raises:
        AlphabetError: M is not a power of two (>= 2), or SQAM with 4 not dividing M.
    """
    try:
        family = Family(family.upper()) if isinstance(family, str) else Family(family)
    except ValueError:
        raise AlphabetError(f"Unknown modulation family: {family}")

    if M < 2 or (M & (M - 1)) != 0:
        raise AlphabetError(f"Alphabet size must be a power of two >= 2, got {M}")
    m = int(M).bit_length() - 1

    if family == Family.PAM:
        symbols = np.arange(M, dtype=float).astype(complex)
    elif family == Family.ASK:
        symbols = np.arange(-(M - 1), M, 2, dtype=float).astype(complex)
    else:
        if M % 4 != 0:
            raise AlphabetError(f"SQAM requires M divisible by 4, got {M}")
        symbols = _sqam_points(M)

    return ModulationAlphabet(family=family, M=M, m=m, symbols=symbols, gain=1.0)


def bit_labels(alphabet: ModulationAlphabet) -> np.ndarray:
    """Natural-binary labels of the symbol indices, MSB first, shape (M, m)."""
    idx = np.arange(alphabet.M)
    shifts = np.arange(alphabet.m - 1, -1, -1)
    return ((idx[:, None] >> shifts[None, :]) & 1).astype(np.int8)
