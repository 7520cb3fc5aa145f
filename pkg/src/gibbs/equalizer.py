"""
Gibbs-sampling equalizer adapter for the SIC receiver.
"""

import numpy as np

from src.channel.auxiliary import AuxiliaryChannel, make_auxiliary
from src.channel.model import DiscreteChannel
from src.gibbs.sampler import GibbsConfig, count_gibbs_multiplications, run_gibbs_stage
from src.modem.alphabet import ModulationAlphabet
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput


class GibbsEqualizer:
    name = "gibbs"

    def __init__(self, aux: AuxiliaryChannel, alphabet: ModulationAlphabet, cfg: GibbsConfig):
        self.aux = aux
        self.alphabet = alphabet
        self.cfg = cfg

    @classmethod
    def from_channel(cls, channel: DiscreteChannel, alphabet: ModulationAlphabet, cfg: GibbsConfig) -> "GibbsEqualizer":
        N_tilde = min(cfg.N_tilde, channel.memory)
        return cls(make_auxiliary(channel, alphabet, N_tilde), alphabet, cfg)

    def stage_apps(self, stage: StageInput, rng: np.random.Generator = None) -> AppMatrix:
        return run_gibbs_stage(stage, self.aux, self.alphabet, self.cfg, rng)

    def multiplications_per_app(self, S: int) -> float:
        return float(count_gibbs_multiplications(self.aux.memory, self.alphabet.m,
                                                 self.cfg.N_iter, self.cfg.N_par, S))
