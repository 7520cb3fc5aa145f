"""
Truncated-memory auxiliary channel used by the mismatched FBA and by Gibbs
sampling.

The auxiliary model keeps N_tilde + 1 consecutive symbols of the exact slot
window (the run with the largest transmit-filter energy) and replaces the
dropped symbols by the alphabet mean. With the kept run ending D symbols
before the slot's own symbol, slot k + D is explained by x_{k-N_tilde}..x_k.
"""

from dataclasses import dataclass

import numpy as np

from src.channel.model import DiscreteChannel, mean_batch, slot_log_likelihood
from src.errors import ChannelError
from src.modem.alphabet import ModulationAlphabet


@dataclass(frozen=True)
class AuxiliaryChannel:
    channel: DiscreteChannel
    memory: int
    D: int
    A: np.ndarray
    offset: np.ndarray

    @property
    def sigma2(self) -> float:
        return self.channel.sigma2

    @property
    def real(self) -> bool:
        return self.channel.output_is_real

    @property
    def N_os(self) -> int:
        return self.channel.spec.N_os

    @property
    def exact(self) -> bool:
        return self.memory == self.channel.memory

    def mean_batch(self, windows: np.ndarray) -> np.ndarray:
        """Slot means for windows of memory + 1 symbols (oldest first)."""
        if windows.shape[-1] != self.memory + 1:
            raise ChannelError(f"Window length {windows.shape[-1]} != {self.memory + 1}")
        return mean_batch(windows, self.A, self.channel.response.H,
                          self.channel.spec.nonlinearity, self.real, self.offset)

    def log_likelihood(self, y_slot: np.ndarray, windows: np.ndarray) -> np.ndarray:
        return slot_log_likelihood(y_slot, self.mean_batch(windows), self.sigma2, self.real)


def make_auxiliary(channel: DiscreteChannel,
                   alphabet: ModulationAlphabet,
                   N_tilde: int = None) -> AuxiliaryChannel:
    """Build the mismatched-memory model; N_tilde=None gives the exact model."""
    K = channel.memory
    N_tilde = K if N_tilde is None else int(N_tilde)
    if not 0 <= N_tilde <= K:
        raise ChannelError(f"Mismatched memory must lie in [0, {K}], got {N_tilde}")

    A_full = channel.response.A
    energy = np.sum(np.abs(A_full) ** 2, axis=0)
    run = np.convolve(energy, np.ones(N_tilde + 1), mode="valid")
    # ties resolve to the latest run, i.e. the smallest delay
    start = int(len(run) - 1 - np.argmax(run[::-1]))
    keep = np.arange(start, start + N_tilde + 1)
    dropped = np.setdiff1d(np.arange(K + 1), keep)

    offset = alphabet.mean * A_full[:, dropped].sum(axis=1)
    return AuxiliaryChannel(channel=channel, memory=N_tilde, D=K - start - N_tilde,
                            A=A_full[:, keep], offset=offset)
