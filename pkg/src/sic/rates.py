"""
Monte-Carlo estimation of mismatched SIC rates and the report rows.
"""

from dataclasses import dataclass
from typing import Dict, List, Sequence, Union

import numpy as np
from loguru import logger

from src.sic.apps import PROBABILITY_FLOOR, AppMatrix

REPORT_COLUMNS = [
    "snr_db",
    "modulation",
    "M",
    "S",
    "stage",
    "equalizer",
    "rate_bpcu",
    "n",
    "n_blk",
    "seed",
    "multiplications_per_app",
]

AppLike = Union[AppMatrix, np.ndarray]


def _as_q(apps: AppLike) -> np.ndarray:
    return apps.q if isinstance(apps, AppMatrix) else np.asarray(apps, dtype=float)


def log2_true_probabilities(apps: AppLike, true_indices: np.ndarray) -> np.ndarray:
    q = _as_q(apps)
    true_indices = np.asarray(true_indices, dtype=int)
    if q.shape[0] != true_indices.shape[0]:
        raise ValueError(f"APP rows ({q.shape[0]}) and true symbols ({true_indices.shape[0]}) differ")
    p = q[np.arange(q.shape[0]), true_indices]
    return np.log2(np.maximum(p, PROBABILITY_FLOOR))


def estimate_rate(apps: Union[AppLike, Sequence[AppLike]],
                  true_symbols: Union[np.ndarray, Sequence[np.ndarray]]) -> float:
    """I_q = m + mean log2 Q(true symbol), clamped to [0, m].

    apps/true_symbols may be one stage of one frame or sequences over N_blk
    frames; the mean runs over all positions of all frames.
    """
    if isinstance(apps, (AppMatrix, np.ndarray)):
        apps, true_symbols = [apps], [true_symbols]
    logs = np.concatenate([log2_true_probabilities(a, t) for a, t in zip(apps, true_symbols)])
    M = _as_q(apps[0]).shape[1]
    m = np.log2(M)
    rate = float(m + logs.mean())
    clamped = float(np.clip(rate, 0.0, m))
    if clamped != rate:
        logger.debug(f"Rate estimate {rate:.4f} clamped to [0, {m:g}]")
    return clamped


@dataclass
class RateReport:
    """Per-stage and average rates for one SNR point."""
    stage_rates: List[float]
    Ptx_dB: float
    modulation: str
    M: int
    S: int
    equalizer: str
    n: int
    N_blk: int
    seed: int
    multiplications_per_app: float = float("nan")

    @property
    def average(self) -> float:
        return float(np.mean(self.stage_rates))

    def to_rows(self) -> List[Dict]:
        base = {
            "snr_db": self.Ptx_dB,
            "modulation": self.modulation,
            "M": self.M,
            "S": self.S,
            "equalizer": self.equalizer,
            "n": self.n,
            "n_blk": self.N_blk,
            "seed": self.seed,
            "multiplications_per_app": self.multiplications_per_app,
        }
        rows = [{**base, "stage": str(s), "rate_bpcu": r} for s, r in enumerate(self.stage_rates, start=1)]
        rows.append({**base, "stage": "avg", "rate_bpcu": self.average})
        return [{col: row[col] for col in REPORT_COLUMNS} for row in rows]
