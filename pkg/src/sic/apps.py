"""
Per-position APP matrices produced by every equalizer.
"""

from dataclasses import dataclass

import numpy as np

PROBABILITY_FLOOR = 1e-12


@dataclass(frozen=True)
class AppMatrix:
    """N x M matrix of per-position PMFs for one SIC stage."""
    q: np.ndarray

    @property
    def N(self) -> int:
        return int(self.q.shape[0])

    @property
    def M(self) -> int:
        return int(self.q.shape[1])

    @classmethod
    def from_weights(cls, weights: np.ndarray, floor: float = PROBABILITY_FLOOR) -> "AppMatrix":
        """Normalize nonnegative row weights, clamp at the floor and renormalize."""
        w = np.asarray(weights, dtype=float)
        totals = w.sum(axis=1, keepdims=True)
        M = w.shape[1]
        q = np.divide(w, totals, out=np.full_like(w, 1.0 / M), where=totals > 0)
        q = np.maximum(q, floor)
        return cls(q=q / q.sum(axis=1, keepdims=True))

    @classmethod
    def from_log_weights(cls, log_w: np.ndarray, floor: float = PROBABILITY_FLOOR) -> "AppMatrix":
        log_w = np.asarray(log_w, dtype=float)
        return cls.from_weights(np.exp(log_w - log_w.max(axis=1, keepdims=True)), floor)

    @classmethod
    def uniform(cls, N: int, M: int) -> "AppMatrix":
        return cls(q=np.full((N, M), 1.0 / M))

    def prob_of(self, indices: np.ndarray) -> np.ndarray:
        return self.q[np.arange(self.N), np.asarray(indices)]

    def hard_decisions(self) -> np.ndarray:
        return np.argmax(self.q, axis=1)
