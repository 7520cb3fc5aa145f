"""
NN equalizer adapter: one trained network per SIC stage.
"""

from typing import Dict

import numpy as np

from src.errors import ConfigError
from src.nn.inputs import build_inputs
from src.nn.model import RnnModel
from src.nn.network import predict_apps
from src.nn.topology import count_multiplications
from src.sic.apps import AppMatrix
from src.sic.receiver import StageInput


class NnEqualizer:
    name = "nn"

    def __init__(self, models: Dict[int, RnnModel], N_os: int):
        self.models = models
        self.N_os = N_os

    def stage_apps(self, stage: StageInput, rng: np.random.Generator = None) -> AppMatrix:
        model = self.models.get(stage.s)
        if model is None:
            raise ConfigError(f"No trained network for stage {stage.s}")
        if model.topology.Gamma != stage.S - stage.s + 1:
            raise ConfigError(f"Stage {stage.s} network has Gamma={model.topology.Gamma}, "
                              f"expected {stage.S - stage.s + 1}")
        return predict_apps(model, build_inputs(stage, model.topology, self.N_os))

    def multiplications_per_app(self, S: int) -> float:
        first = self.models.get(1) or next(iter(self.models.values()))
        return float(count_multiplications(first.topology, S))
