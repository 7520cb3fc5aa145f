"""Experiment configuration, sweep pipeline and result persistence."""

from .config import (
    ChannelProfile,
    ModulationConfig,
    FbaParams,
    GibbsParams,
    TrainParams,
    NnParams,
    ExperimentConfig,
    RunnerSettings,
    config_from_dict,
    load_config,
    configure_logging,
)
from .pipeline import RateJob, ResultWriter, SweepRunner, run_sweep

__all__ = [
    "ChannelProfile",
    "ModulationConfig",
    "FbaParams",
    "GibbsParams",
    "TrainParams",
    "NnParams",
    "ExperimentConfig",
    "RunnerSettings",
    "config_from_dict",
    "load_config",
    "configure_logging",
    "RateJob",
    "ResultWriter",
    "SweepRunner",
    "run_sweep",
]
