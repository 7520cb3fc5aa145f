"""Bit-wise Gibbs-sampling APP baseline."""

from .sampler import GibbsConfig, run_gibbs_stage, count_gibbs_multiplications
from .equalizer import GibbsEqualizer

__all__ = [
    "GibbsConfig",
    "run_gibbs_stage",
    "count_gibbs_multiplications",
    "GibbsEqualizer",
]
