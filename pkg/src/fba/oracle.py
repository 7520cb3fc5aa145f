"""
Brute-force conditional marginals by exhaustive enumeration of the unknown
symbols. Reference for every equalizer on small instances.
"""

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view
from scipy.special import logsumexp

from src.channel.auxiliary import AuxiliaryChannel
from src.errors import StateSpaceTooLargeError
from src.modem.alphabet import ModulationAlphabet
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput

MAX_CANDIDATES = 2 ** 24
CHUNK = 2 ** 14


def sequence_log_likelihood(x: np.ndarray, y_slots: np.ndarray, aux: AuxiliaryChannel) -> np.ndarray:
    """log p(y | x) under the auxiliary model for a batch of sequences, shape (B, n) -> (B,)."""
    B, n = x.shape
    padded = np.concatenate([np.zeros((B, aux.memory), dtype=complex), x], axis=1)
    observed = n - aux.D
    if observed <= 0:
        return np.zeros(B)
    windows = sliding_window_view(padded, aux.memory + 1, axis=1)[:, :observed]
    return aux.log_likelihood(y_slots[aux.D:], windows).sum(axis=1)


def brute_force_apps(stage: StageInput,
                     aux: AuxiliaryChannel,
                     alphabet: ModulationAlphabet,
                     max_candidates: int = MAX_CANDIDATES) -> AppMatrix:
    """Exact APPs of the stage-s symbols given the genie symbols of stages < s."""
    M, n = alphabet.M, stage.n
    y_slots = np.asarray(stage.y).reshape(n, aux.N_os)
    unknown = np.flatnonzero(~stage.known_mask)
    total = M ** unknown.size
    if total > max_candidates:
        raise StateSpaceTooLargeError(
            f"Enumeration of {unknown.size} unknown symbols ({total} candidates) exceeds {max_candidates}"
        )

    targets = stage.partition.positions(stage.s)
    cols = np.searchsorted(unknown, targets)
    powers = M ** np.arange(unknown.size - 1, -1, -1)
    acc = np.full((targets.size, M), -np.inf)

    for start in range(0, total, CHUNK):
        idx = np.arange(start, min(start + CHUNK, total))
        digits = (idx[:, None] // powers[None, :]) % M
        x = np.broadcast_to(stage.x_known, (idx.size, n)).astype(complex)
        x[:, unknown] = alphabet.points[digits]
        ll = sequence_log_likelihood(x, y_slots, aux)
        for t, c in enumerate(cols):
            for a in range(M):
                hit = ll[digits[:, c] == a]
                if hit.size:
                    acc[t, a] = np.logaddexp(acc[t, a], logsumexp(hit))

    return AppMatrix.from_log_weights(acc)
