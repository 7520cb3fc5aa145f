"""
Serialized network inputs for stage s: per unknown position (stages s..S in
serial order) an L_Y-sample channel-output window and the L_IC closest
known symbols of stages 1..s-1, zero-padded outside the block.
"""

from typing import Tuple

import numpy as np

from src.channel.model import DiscreteChannel
from src.errors import ShapeMismatchError
from src.nn.topology import RnnTopology
from src.sic.receiver import StageInput

NORMALIZATION_SAMPLES = 10_000


def input_lag(channel: DiscreteChannel) -> int:
    """Slot offset at which a symbol's strongest transmit-filter contribution arrives."""
    energy = np.sum(np.abs(channel.response.A) ** 2, axis=0)
    # ties resolve to the smallest offset
    col = len(energy) - 1 - int(np.argmax(energy[::-1]))
    return channel.memory - col


def known_offsets(j: int, s: int, S: int, L_IC: int) -> np.ndarray:
    """Offsets of the L_IC known positions closest to a stage-j position, ascending.

    Distance ties go to the smaller index; empty for s = 1.
    """
    if s == 1 or L_IC == 0:
        return np.zeros(0, dtype=int)
    reach = (L_IC + 2) * S
    delta = np.arange(-reach, reach + 1)
    known = delta[(j - 1 + delta) % S + 1 < s]
    order = np.lexsort((known, np.abs(known)))
    return np.sort(known[order[:L_IC]])


def _y_windows(y: np.ndarray, kappa: np.ndarray, topology: RnnTopology, N_os: int) -> np.ndarray:
    L_Y = topology.L_Y
    u = np.arange(-((L_Y - 1) // 2), -(-(L_Y - 1) // 2) + 1)
    idx = N_os * (kappa + topology.lag)[:, None] + u[None, :] - 1
    valid = (idx >= 0) & (idx < y.size)
    return np.where(valid, y[np.clip(idx, 0, y.size - 1)], 0.0)


def _known_windows(stage: StageInput, kappa: np.ndarray, L_IC: int) -> np.ndarray:
    out = np.zeros((kappa.size, L_IC), dtype=complex)
    if stage.s == 1 or L_IC == 0:
        return out
    S, n = stage.S, stage.n
    stages = (kappa - 1) % S + 1
    for j in np.unique(stages):
        rows = np.flatnonzero(stages == j)
        pos = kappa[rows][:, None] + known_offsets(int(j), stage.s, S, L_IC)[None, :]
        valid = (pos >= 1) & (pos <= n)
        out[rows] = np.where(valid, stage.x_known[np.clip(pos, 1, n) - 1], 0.0)
    return out


def _real_features(values: np.ndarray, as_complex: bool) -> np.ndarray:
    if as_complex:
        return np.concatenate([values.real, values.imag], axis=-1)
    return values.real


def build_inputs(stage: StageInput, topology: RnnTopology, N_os: int) -> np.ndarray:
    """Raw (unnormalized) inputs, shape (T, l_1) with T = N * (S - s + 1)."""
    y = np.asarray(stage.y)
    if np.iscomplexobj(y) and not topology.y_complex and np.any(y.imag != 0):
        raise ShapeMismatchError("Complex channel outputs need a topology with y_complex=True")
    kappa = np.flatnonzero(~stage.known_mask) + 1
    y_part = _real_features(_y_windows(y, kappa, topology, N_os), topology.y_complex)
    x_part = _real_features(_known_windows(stage, kappa, topology.L_IC), topology.x_complex)
    inputs = np.concatenate([y_part, x_part], axis=1)
    if inputs.shape[1] != topology.input_size:
        raise ShapeMismatchError(f"Built {inputs.shape[1]} input features, topology expects {topology.input_size}")
    return inputs


def estimate_normalization(inputs: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Per-coordinate mean and standard deviation; constant coordinates keep unit scale."""
    flat = inputs.reshape(-1, inputs.shape[-1])
    mean = flat.mean(axis=0)
    std = flat.std(axis=0)
    return mean, np.where(std < 1e-12, 1.0, std)


def stage_targets(stage: StageInput, indices: np.ndarray) -> np.ndarray:
    return np.asarray(indices)[stage.partition.positions(stage.s)]

