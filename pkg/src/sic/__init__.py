"""SIC partitioning, orchestration and rate estimation."""

from .partition import SicPartition, partition
from .apps import AppMatrix, PROBABILITY_FLOOR
from .rates import RateReport, REPORT_COLUMNS, estimate_rate
from .receiver import (
    Equalizer,
    StageInput,
    stage_input,
    run_sic,
    stage_true_indices,
    stage_rates,
)

__all__ = [
    "SicPartition",
    "partition",
    "AppMatrix",
    "PROBABILITY_FLOOR",
    "RateReport",
    "REPORT_COLUMNS",
    "estimate_rate",
    "Equalizer",
    "StageInput",
    "stage_input",
    "run_sic",
    "stage_true_indices",
    "stage_rates",
]
