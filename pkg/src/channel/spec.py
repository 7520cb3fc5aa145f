"""
Analog channel description: sampling, filters, nonlinearity and noise.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

from src.errors import ChannelError


class NonlinearityKind(Enum):
    """Memoryless nonlinear devices of the system model."""
    SLD = "sld"
    RAPP = "rapp"
    IDENTITY = "identity"


@dataclass(frozen=True)
class Nonlinearity:
    kind: NonlinearityKind = NonlinearityKind.SLD
    p: float = 2.0

    @classmethod
    def parse(cls, name: str, p: float = 2.0) -> "Nonlinearity":
        try:
            return cls(kind=NonlinearityKind(name.lower()), p=p)
        except ValueError:
            raise ChannelError(f"Unknown nonlinearity: {name}")


@dataclass(frozen=True)
class AnalogSpec:
    """Continuous-time parameters and their discrete approximation.

    Times are normalized to the symbol period T_s = 1/B; B and beta2 are only
    used for the dispersion phase. Explicit g_taps/h_taps bypass filter
    synthesis (short test channels).
    """
    B: float = 35e9
    N_sim: int = 2
    N_os: int = 2
    L_fib: float = 0.0
    beta2: float = -2.168e-26
    K_g: int = 303
    K_h: int = 1
    nonlinearity: Nonlinearity = Nonlinearity()
    noise_sigma2: float = 1.0
    noise_real: bool = True
    h_bandwidth: float = 2.0
    grid_factor: int = 8
    g_taps: Optional[Tuple[complex, ...]] = None
    h_taps: Optional[Tuple[complex, ...]] = None

    def __post_init__(self):
        if self.N_sim < 1 or self.N_os < 1 or self.N_sim % self.N_os != 0:
            raise ChannelError(f"N_sim/N_os must be a positive integer, got {self.N_sim}/{self.N_os}")
        K_g = len(self.g_taps) if self.g_taps is not None else self.K_g
        K_h = len(self.h_taps) if self.h_taps is not None else self.K_h
        if K_g % 2 == 0 or K_h % 2 == 0:
            raise ChannelError(f"Filter lengths must be odd, got K_g={K_g}, K_h={K_h}")
        if self.noise_sigma2 < 0:
            raise ChannelError(f"Noise variance must be >= 0, got {self.noise_sigma2}")
        if self.grid_factor < 8:
            raise ChannelError("Frequency grid must oversample the tap grid at least 8x")

    @property
    def d(self) -> int:
        return self.N_sim // self.N_os

    @property
    def taps_g(self) -> int:
        return len(self.g_taps) if self.g_taps is not None else self.K_g

    @property
    def taps_h(self) -> int:
        return len(self.h_taps) if self.h_taps is not None else self.K_h
