"""
FBA equalizer adapter for the SIC receiver and its complexity counter.
"""

import numpy as np

from src.channel.auxiliary import AuxiliaryChannel, make_auxiliary
from src.channel.model import DiscreteChannel
from src.fba.trellis import DEFAULT_MAX_STATES, run_fba_stage
from src.modem.alphabet import ModulationAlphabet
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput


def count_fba_multiplications(M: int, N_tilde: int, S: int = 1) -> int:
    """Multiplications per APP estimate, S * M^(N_tilde + 1)."""
    return int(S) * int(M) ** (int(N_tilde) + 1)


class FbaEqualizer:
    """Exact (N_tilde = memory) or mismatched-memory forward-backward equalizer."""

    name = "fba"

    def __init__(self,
                 aux: AuxiliaryChannel,
                 alphabet: ModulationAlphabet,
                 normalize: bool = True,
                 max_states: int = DEFAULT_MAX_STATES,
                 log_domain: bool = False):
        self.aux = aux
        self.alphabet = alphabet
        self.normalize = normalize
        self.max_states = max_states
        self.log_domain = log_domain

    @classmethod
    def from_channel(cls, channel: DiscreteChannel, alphabet: ModulationAlphabet,
                     N_tilde: int = None, **kwargs) -> "FbaEqualizer":
        return cls(make_auxiliary(channel, alphabet, N_tilde), alphabet, **kwargs)

    def stage_apps(self, stage: StageInput, rng: np.random.Generator = None) -> AppMatrix:
        metrics = run_fba_stage(stage, self.aux, self.alphabet,
                                normalize=self.normalize, max_states=self.max_states,
                                log_domain=self.log_domain)
        return metrics.apps(self.alphabet.M)

    def multiplications_per_app(self, S: int) -> float:
        return float(count_fba_multiplications(self.alphabet.M, self.aux.memory, S))
