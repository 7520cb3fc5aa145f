"""
Genie-aided SIC receiver: stage s sees the true symbols of stages 1..s-1.
"""

from dataclasses import dataclass
from typing import List, Optional, Protocol

import numpy as np
from loguru import logger

from src.modem.source import Frame
from src.sic.apps import AppMatrix
from src.sic.partition import SicPartition
from src.sic.rates import estimate_rate


@dataclass(frozen=True)
class StageInput:
    """Everything an equalizer may use in stage s.

    x_known carries channel-input values at known positions and zeros
    elsewhere, so unknown symbols cannot leak into an equalizer.
    """
    y: np.ndarray
    x_known: np.ndarray
    known_mask: np.ndarray
    s: int
    partition: SicPartition

    @property
    def S(self) -> int:
        return self.partition.S

    @property
    def n(self) -> int:
        return self.partition.n


class Equalizer(Protocol):
    name: str

    def stage_apps(self, stage: StageInput, rng: np.random.Generator) -> AppMatrix:
        ...

    def multiplications_per_app(self, S: int) -> float:
        ...


def stage_input(y: np.ndarray, frame: Frame, s: int, S: int) -> StageInput:
    part = SicPartition(S=S, n=frame.n)
    mask = part.known_mask(s)
    return StageInput(y=y, x_known=np.where(mask, frame.x, 0.0), known_mask=mask, s=s, partition=part)


def run_sic(y: np.ndarray,
            frame: Frame,
            equalizer: Equalizer,
            S: int,
            rng: Optional[np.random.Generator] = None) -> List[AppMatrix]:
    """APPs of every stage, computed sequentially with genie priors."""
    rng = rng if rng is not None else np.random.default_rng(0)
    apps = []
    for s in range(1, S + 1):
        logger.debug(f"Stage {s}/{S}: running {equalizer.name}")
        apps.append(equalizer.stage_apps(stage_input(y, frame, s, S), rng))
    return apps


def stage_true_indices(frame: Frame, S: int) -> List[np.ndarray]:
    part = SicPartition(S=S, n=frame.n)
    return [frame.indices[part.positions(s)] for s in range(1, S + 1)]


def stage_rates(apps_per_frame: List[List[AppMatrix]], frames: List[Frame], S: int) -> List[float]:
    """Per-stage rates averaged over frames."""
    truths = [stage_true_indices(f, S) for f in frames]
    return [estimate_rate([a[s] for a in apps_per_frame], [t[s] for t in truths]) for s in range(S)]
