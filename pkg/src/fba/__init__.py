"""Forward-backward APP equalizer with SIC priors."""

from .trellis import (
    StateSpace,
    TrellisMetrics,
    likelihood_fI,
    factor_fII,
    run_fba_stage,
    DEFAULT_MAX_STATES,
)
from .oracle import brute_force_apps, sequence_log_likelihood
from .equalizer import FbaEqualizer, count_fba_multiplications

__all__ = [
    "StateSpace",
    "TrellisMetrics",
    "likelihood_fI",
    "factor_fII",
    "run_fba_stage",
    "DEFAULT_MAX_STATES",
    "brute_force_apps",
    "sequence_log_likelihood",
    "FbaEqualizer",
    "count_fba_multiplications",
]
