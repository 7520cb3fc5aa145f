"""
SIC partitioning: serial index kappa(s, t) = s + (t - 1) S.
"""

from dataclasses import dataclass
from typing import List, Union

import numpy as np

from src.errors import PartitionError
from src.modem.source import Frame


@dataclass(frozen=True)
class SicPartition:
    S: int
    n: int

    def __post_init__(self):
        if self.S < 1:
            raise PartitionError(f"Number of stages must be >= 1, got {self.S}")
        if self.n % self.S != 0:
            raise PartitionError(f"Block length n={self.n} not divisible by S={self.S}")

    @property
    def N(self) -> int:
        return self.n // self.S

    def kappa(self, s: int, t: int) -> int:
        """1-based serial index of the parallel index (s, t)."""
        return s + (t - 1) * self.S

    def stage_of(self, kappa: Union[int, np.ndarray]):
        """1-based stage of serial index kappa (also for kappa <= 0)."""
        return (np.asarray(kappa) - 1) % self.S + 1

    def positions(self, s: int) -> np.ndarray:
        """0-based array positions of stage s in the serial block."""
        return np.arange(s - 1, self.n, self.S)

    def known_mask(self, s: int) -> np.ndarray:
        """Positions decided by stages 1..s-1."""
        return self.stage_of(np.arange(1, self.n + 1)) < s


def partition(frame: Union[Frame, np.ndarray], S: int) -> List[np.ndarray]:
    """Per-stage symbol strings V_1..V_S with V_s[t] = x[kappa(s, t)]."""
    x = frame.x if isinstance(frame, Frame) else np.asarray(frame)
    part = SicPartition(S=S, n=x.shape[0])
    return [x[part.positions(s)] for s in range(1, S + 1)]
