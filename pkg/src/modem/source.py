"""
u.i.i.d. symbol sources, frame construction and transmit power calibration.
"""

from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np
from loguru import logger

from src.errors import ChannelError
from src.modem.alphabet import ModulationAlphabet

if TYPE_CHECKING:
    from src.channel.model import DiscreteChannel


@dataclass(frozen=True)
class Frame:
    """One transmitted block.

    x holds the channel-input symbols (after gain), indices the alphabet
    indices. guard is the number of zero simulation samples added before and
    after the block when the waveform is built.
    """
    x: np.ndarray
    indices: np.ndarray
    alphabet: ModulationAlphabet
    guard: int = 0

    @property
    def n(self) -> int:
        return int(self.x.shape[0])


def draw_symbols(alphabet: ModulationAlphabet,
                 n: int,
                 seed,
                 channel: Optional["DiscreteChannel"] = None) -> Frame:
    """Draw n u.i.i.d. symbols; deterministic for a fixed seed.

    seed may be an int, a SeedSequence or a Generator.
    """
    if n < 1:
        raise ValueError(f"Block length must be >= 1, got {n}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    indices = rng.integers(0, alphabet.M, size=n)
    guard = channel.guard if channel is not None else 0
    return Frame(x=alphabet.points[indices], indices=indices, alphabet=alphabet, guard=guard)


def frame_from_indices(alphabet: ModulationAlphabet,
                       indices: np.ndarray,
                       channel: Optional["DiscreteChannel"] = None) -> Frame:
    indices = np.asarray(indices, dtype=int)
    guard = channel.guard if channel is not None else 0
    return Frame(x=alphabet.points[indices], indices=indices, alphabet=alphabet, guard=guard)


def average_power(alphabet: ModulationAlphabet, g: np.ndarray, N_sim: int) -> float:
    """Average transmit power for u.i.i.d. symbols in closed form.

    Uses the T_sim surrogate of the power integral: the mean over the N_sim
    polyphase components of E|x(i T_sim)|^2, split into a variance part
    (sum of |g|^2 on the component) and a mean part (|sum of g|^2 on it).
    """
    g = np.asarray(g)
    mu = alphabet.mean
    var = alphabet.energy - abs(mu) ** 2
    power = 0.0
    for phase in range(N_sim):
        taps = g[phase::N_sim]
        power += var * np.sum(np.abs(taps) ** 2) + abs(mu) ** 2 * abs(np.sum(taps)) ** 2
    return float(power / N_sim)


def calibrate_gain(alphabet: ModulationAlphabet,
                   channel: "DiscreteChannel",
                   target_Ptx: float) -> float:
    """Gain that makes the average transmit power equal target_Ptx (linear).

    The alphabet's current gain is ignored; the result applies to the
    unscaled symbols.
    """
    if target_Ptx <= 0:
        raise ValueError(f"Target power must be positive, got {target_Ptx}")
    unit = alphabet.with_gain(1.0)
    p_unit = average_power(unit, channel.g, channel.spec.N_sim)
    if p_unit <= 0:
        raise ChannelError("Transmit filter has zero energy")
    gain = float(np.sqrt(target_Ptx / p_unit))
    logger.debug(f"Calibrated gain {gain:.6g} for {alphabet.label} at Ptx={target_Ptx:.6g}")
    return gain


def db_to_linear(value_db: float) -> float:
    return float(10.0 ** (value_db / 10.0))
