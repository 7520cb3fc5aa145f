"""
Bit-wise Gibbs sampling of the unknown symbols of one SIC stage.

Each of N_par chains starts from uniformly drawn symbols (genie symbols of
earlier stages stay fixed). A sweep visits the unknown positions in index
order and resamples every label bit from its conditional given all other
bits, using the truncated-memory likelihood of the slots the symbol touches.
After burn-in the visited stage-s symbols are counted over sweeps and chains.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np
from loguru import logger
from scipy.special import expit

from src.channel.auxiliary import AuxiliaryChannel
from src.errors import ConfigError
from src.modem.alphabet import ModulationAlphabet, bit_labels
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput


@dataclass(frozen=True)
class GibbsConfig:
    N_tilde: int = 21
    N_iter: int = 125
    N_par: int = 64
    burn_in: int = 25
    seed: Optional[int] = None

    def __post_init__(self):
        if self.N_par < 1:
            raise ConfigError(f"N_par must be >= 1, got {self.N_par}")
        if not 0 <= self.burn_in < self.N_iter:
            raise ConfigError(f"burn_in must lie in [0, N_iter), got {self.burn_in} with N_iter={self.N_iter}")
        if self.N_tilde < 0:
            raise ConfigError(f"N_tilde must be >= 0, got {self.N_tilde}")

    @property
    def counted_sweeps(self) -> int:
        return self.N_iter - self.burn_in


def count_gibbs_multiplications(N_tilde: int, m: int, N_iter: int, N_par: int, S: int = 1) -> int:
    """Multiplications per APP estimate, S * N_tilde^2 * m * N_iter * N_par."""
    return int(S) * int(N_tilde) ** 2 * int(m) * int(N_iter) * int(N_par)


class _ChainState:
    """Symbol indices and zero-padded channel inputs of all chains."""

    def __init__(self, stage: StageInput, alphabet: ModulationAlphabet, memory: int, rng: np.random.Generator, N_par: int):
        self.points = alphabet.points
        self.memory = memory
        n = stage.n
        self.unknown = np.flatnonzero(~stage.known_mask)
        self.indices = np.zeros((N_par, n), dtype=np.int64)
        self.indices[:, self.unknown] = rng.integers(alphabet.M, size=(N_par, self.unknown.size))
        self.padded = np.zeros((N_par, memory + n), dtype=complex)
        self.padded[:, memory:] = np.where(stage.known_mask, stage.x_known, self.points[self.indices])

    def set(self, p: int, idx: np.ndarray) -> None:
        self.indices[:, p] = idx
        self.padded[:, self.memory + p] = self.points[idx]


def _label_flips(alphabet: ModulationAlphabet) -> np.ndarray:
    """flips[b, v, i] is the symbol whose label equals that of i with bit b set to v."""
    labels = bit_labels(alphabet).astype(np.int64)
    place = 1 << np.arange(alphabet.m - 1, -1, -1)
    lookup = np.zeros(1 << alphabet.m, dtype=np.int64)
    lookup[labels @ place] = np.arange(alphabet.M)
    flips = np.empty((alphabet.m, 2, alphabet.M), dtype=np.int64)
    for b in range(alphabet.m):
        for v in (0, 1):
            forced = labels.copy()
            forced[:, b] = v
            flips[b, v] = lookup[forced @ place]
    return flips


def _stage_rng(cfg: GibbsConfig, stage: StageInput, rng: Optional[np.random.Generator]) -> np.random.Generator:
    if rng is not None:
        return rng
    # one child stream per stage of the seeded run
    return np.random.default_rng(np.random.SeedSequence(cfg.seed).spawn(stage.S)[stage.s - 1])


def _resample_bit(chains: _ChainState, aux: AuxiliaryChannel, y_slots: np.ndarray,
                  p: int, flips: np.ndarray, rng: np.random.Generator) -> None:
    n = y_slots.shape[0]
    current = chains.indices[:, p]
    cand = flips[:, current]

    # positions (1-based) whose slot window contains p + 1 and whose slot exists
    first, last = p + 1, min(p + 1 + aux.memory, n - aux.D)
    if first > last:
        bit = rng.random(current.size) < 0.5
        chains.set(p, np.where(bit, cand[1], cand[0]))
        return

    ks = np.arange(first, last + 1)
    cols = (ks - 1)[:, None] + np.arange(aux.memory + 1)[None, :]
    windows = np.broadcast_to(chains.padded[:, cols], (2,) + chains.padded.shape[:1] + cols.shape).copy()
    windows[..., cols == chains.memory + p] = chains.points[cand][:, :, None]
    ll = aux.log_likelihood(y_slots[ks - 1 + aux.D], windows).sum(axis=-1)

    bit = rng.random(current.size) < expit(ll[1] - ll[0])
    chains.set(p, np.where(bit, cand[1], cand[0]))


def run_gibbs_stage(stage: StageInput,
                    aux: AuxiliaryChannel,
                    alphabet: ModulationAlphabet,
                    cfg: GibbsConfig,
                    rng: Optional[np.random.Generator] = None) -> AppMatrix:
    """Add-1 smoothed symbol frequencies of the stage-s positions.

    A given rng is used as is; otherwise the stage draws from a child of
    SeedSequence(cfg.seed).
    """
    rng = _stage_rng(cfg, stage, rng)
    M = alphabet.M
    y_slots = np.asarray(stage.y).reshape(stage.n, aux.N_os)
    targets = stage.partition.positions(stage.s)
    chains = _ChainState(stage, alphabet, aux.memory, rng, cfg.N_par)
    flips = _label_flips(alphabet)

    counts = np.zeros((targets.size, M))
    rows = np.repeat(np.arange(targets.size)[None, :], cfg.N_par, axis=0)
    for sweep in range(cfg.N_iter):
        for p in chains.unknown:
            for bit_flips in flips:
                _resample_bit(chains, aux, y_slots, int(p), bit_flips, rng)
        if sweep >= cfg.burn_in:
            np.add.at(counts, (rows, chains.indices[:, targets]), 1.0)

    logger.debug(f"Stage {stage.s}/{stage.S}: Gibbs ran {cfg.N_iter} sweeps on {cfg.N_par} chains, "
                 f"{cfg.counted_sweeps} counted")
    return AppMatrix.from_weights(counts + 1.0)
