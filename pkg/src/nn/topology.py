"""
Network topology, complexity counter and the reference configurations of the
short-reach experiments.
"""

from dataclasses import dataclass, replace
from typing import Dict, Optional, Tuple

from src.errors import ConfigError


@dataclass(frozen=True)
class RnnTopology:
    """Layer sizes of a bidirectional (possibly time-varying) RNN.

    hidden holds l_2..l_L; every recurrent layer splits its output evenly
    between the forward and backward paths. Complex channel outputs or
    complex alphabets double the corresponding part of l_1.
    """
    M: int
    L_Y: int
    L_IC: int
    hidden: Tuple[int, ...]
    Gamma: int = 1
    y_complex: bool = False
    x_complex: bool = False
    time_varying: bool = True
    lag: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))
        if not self.hidden:
            raise ConfigError("Topology needs at least one recurrent layer")
        if any(h <= 0 or h % 2 for h in self.hidden):
            raise ConfigError(f"Recurrent layer sizes must be positive and even, got {self.hidden}")
        if self.L_Y < 1 or self.L_IC < 0:
            raise ConfigError(f"Invalid input windows L_Y={self.L_Y}, L_IC={self.L_IC}")
        if self.Gamma < 1:
            raise ConfigError(f"Gamma must be >= 1, got {self.Gamma}")
        if self.M < 2:
            raise ConfigError(f"Alphabet size must be >= 2, got {self.M}")

    @property
    def input_size(self) -> int:
        return self.L_Y * (2 if self.y_complex else 1) + self.L_IC * (2 if self.x_complex else 1)

    @property
    def layer_sizes(self) -> Tuple[int, ...]:
        return (self.input_size,) + self.hidden

    @property
    def L(self) -> int:
        return len(self.layer_sizes)

    @property
    def n_phases(self) -> int:
        """Number of distinct weight sets (1 in classic mode)."""
        return self.Gamma if self.time_varying else 1

    def for_stage(self, s: int, S: int) -> "RnnTopology":
        return replace(self, Gamma=S - s + 1)

    def to_dict(self) -> Dict:
        return {
            "M": self.M, "L_Y": self.L_Y, "L_IC": self.L_IC, "hidden": list(self.hidden),
            "Gamma": self.Gamma, "y_complex": self.y_complex, "x_complex": self.x_complex,
            "time_varying": self.time_varying, "lag": self.lag,
        }

    @classmethod
    def from_dict(cls, data: Dict) -> "RnnTopology":
        return cls(**{**data, "hidden": tuple(data["hidden"])})


def count_multiplications(topology: RnnTopology, S: int = 1) -> int:
    """Multiplications per APP estimate: S * (sum_i l_i l_{i+1} + l_{i+1}^2 / 2 + l_L M)."""
    sizes = topology.layer_sizes
    total = sum(a * b + b * b // 2 for a, b in zip(sizes[:-1], sizes[1:]))
    return int(S) * (total + sizes[-1] * topology.M)


def effective_memory(L_Y: int, N_os: int, T_RNN: int) -> int:
    """Approximate number of symbols the trained network can see."""
    return L_Y // N_os + T_RNN - 1


@dataclass(frozen=True)
class ReferenceConfig:
    """One row of the reference NN parameter table."""
    M: int
    L_fib: float
    families: Tuple[str, ...]
    L_Y: int
    hidden: Tuple[int, ...]
    N_rnn: int
    lr: float
    T_RNN: int
    N_batch: int
    S: int
    L_IC: int
    N_iter: int
    N_blk: int
    n: int

    def topology(self, s: int = 1, x_complex: bool = False, lag: int = 0) -> RnnTopology:
        return RnnTopology(M=self.M, L_Y=self.L_Y, L_IC=self.L_IC, hidden=self.hidden,
                           Gamma=self.S - s + 1, x_complex=x_complex, lag=lag)


_ALL = ("PAM", "ASK", "SQAM")
_REAL = ("PAM", "ASK")

REFERENCE_TOPOLOGIES: Dict[Tuple[int, float, str], ReferenceConfig] = {}


def _register(row: ReferenceConfig) -> None:
    for family in row.families:
        REFERENCE_TOPOLOGIES[(row.M, row.L_fib, family)] = row


for _row in (
    ReferenceConfig(4, 0.0, _ALL, 32, (64,), 47, 1e-3, 32, 128, 2, 16, 10_000, 1_000, 60_000),
    ReferenceConfig(8, 0.0, _ALL, 64, (128, 64), 95, 5e-4, 64, 64, 2, 32, 60_000, 3_000, 60_000),
    ReferenceConfig(16, 0.0, _ALL, 84, (128, 128), 105, 2e-4, 64, 64, 2, 64, 60_000, 3_000, 60_000),
    ReferenceConfig(32, 0.0, _ALL, 84, (128, 128), 105, 1e-4, 64, 64, 2, 64, 60_000, 3_000, 60_000),
    ReferenceConfig(64, 0.0, _ALL, 84, (128, 128, 128, 64), 125, 5e-5, 84, 84, 2, 100, 75_000, 3_000, 60_000),
    ReferenceConfig(128, 0.0, _ALL, 84, (128, 128, 128, 128), 125, 5e-5, 84, 84, 2, 100, 75_000, 3_000, 60_000),
    ReferenceConfig(4, 30e3, _REAL, 64, (128, 64), 95, 5e-4, 64, 128, 2, 32, 20_000, 1_000, 60_000),
    ReferenceConfig(4, 30e3, ("SQAM",), 64, (256, 128, 128), 95, 5e-4, 64, 128, 2, 32, 20_000, 1_000, 60_000),
    ReferenceConfig(8, 30e3, _REAL, 64, (128, 128), 115, 3e-4, 84, 128, 2, 32, 50_000, 1_000, 60_000),
    ReferenceConfig(8, 30e3, ("SQAM",), 64, (256, 128, 128), 115, 3e-4, 84, 128, 2, 32, 50_000, 1_000, 60_000),
    ReferenceConfig(16, 30e3, _ALL, 84, (200, 128, 128), 161, 5e-5, 120, 64, 6, 64, 80_000, 3_000, 80_000),
    ReferenceConfig(32, 30e3, _ALL, 100, (200, 200, 200, 168), 169, 4e-5, 120, 64, 6, 64, 100_000, 7_000, 80_000),
    ReferenceConfig(64, 30e3, _ALL, 100, (300, 300, 300, 240), 169, 4e-5, 120, 64, 6, 100, 100_000, 7_000, 80_000),
):
    _register(_row)


def reference_topology(M: int, L_fib: float, family: str) -> Optional[ReferenceConfig]:
    """Reference row for (M, fiber length in m, family), None if not tabulated."""
    return REFERENCE_TOPOLOGIES.get((int(M), 0.0 if L_fib == 0 else float(L_fib), family.upper()))
