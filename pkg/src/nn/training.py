"""
Online training of one SIC stage network with Adam.

Every iteration simulates a fresh frame, serializes the stage-s inputs and
cuts them into N_batch consecutive snippets of T_RNN inputs, each starting
at phase 0. Recurrent states are reset per snippet.
"""

from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from loguru import logger

from src.channel.model import DiscreteChannel, simulate_frame
from src.errors import ConfigError, TrainingDivergedError
from src.modem.alphabet import ModulationAlphabet
from src.modem.source import draw_symbols
from src.nn.adam import AdamState, adam_step
from src.nn.inputs import NORMALIZATION_SAMPLES, build_inputs, estimate_normalization, stage_targets
from src.nn.model import RnnModel, init_model
from src.nn.network import backward
from src.nn.topology import RnnTopology
from src.sic.receiver import stage_input


@dataclass(frozen=True)
class TrainConfig:
    lr: float = 1e-3
    N_batch: int = 128
    N_iter: int = 10_000
    T_RNN: int = 32
    seed: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    n_norm: int = NORMALIZATION_SAMPLES
    log_every: int = 500

    def __post_init__(self):
        if self.lr <= 0:
            raise ConfigError(f"Learning rate must be positive, got {self.lr}")
        if self.N_batch < 1 or self.N_iter < 0 or self.T_RNN < 1:
            raise ConfigError(f"Invalid batch settings N_batch={self.N_batch}, N_iter={self.N_iter}, T_RNN={self.T_RNN}")

    def snippet_length(self, Gamma: int) -> int:
        """T_RNN rounded down to a multiple of Gamma."""
        T = self.T_RNN - self.T_RNN % Gamma
        if T == 0:
            raise ConfigError(f"T_RNN={self.T_RNN} shorter than the period Gamma={Gamma}")
        if T != self.T_RNN:
            logger.warning(f"T_RNN={self.T_RNN} is not a multiple of Gamma={Gamma}, using {T}")
        return T

    def to_dict(self) -> dict:
        return dict(self.__dict__)


@dataclass
class TrainResult:
    model: RnnModel
    losses: List[float] = field(default_factory=list)


class _BatchSource:
    """Simulates training batches for one stage."""

    def __init__(self, channel: DiscreteChannel, alphabet: ModulationAlphabet,
                 topology: RnnTopology, s: int, S: int, N_batch: int, T: int, rng: np.random.Generator):
        self.channel = channel
        self.alphabet = alphabet
        self.topology = topology
        self.s, self.S = s, S
        self.N_batch, self.T = N_batch, T
        self.per_snippet = T // topology.Gamma
        self.n = N_batch * self.per_snippet * S
        self.rng = rng

    def draw(self) -> Tuple[np.ndarray, np.ndarray]:
        frame = draw_symbols(self.alphabet, self.n, self.rng, self.channel)
        y = simulate_frame(frame, self.channel, self.rng)
        stage = stage_input(y, frame, self.s, self.S)
        inputs = build_inputs(stage, self.topology, self.channel.spec.N_os)
        targets = stage_targets(stage, frame.indices)
        return (inputs.reshape(self.N_batch, self.T, -1),
                targets.reshape(self.N_batch, self.per_snippet))


def _starting_model(topology: RnnTopology, init: Optional[RnnModel], rng: np.random.Generator) -> RnnModel:
    if init is not None:
        if init.topology == topology:
            logger.info("Warm start from a previously trained model")
            return init.copy()
        logger.warning(f"Warm-start topology {init.topology} does not match {topology}, initializing fresh")
    return init_model(topology, rng)


def train_stage(channel: DiscreteChannel,
                alphabet: ModulationAlphabet,
                S: int,
                s: int,
                topology: RnnTopology,
                cfg: TrainConfig,
                init: Optional[RnnModel] = None) -> TrainResult:
    """Train the stage-s network; deterministic for a fixed cfg.seed."""
    topology = topology.for_stage(s, S)
    T = cfg.snippet_length(topology.Gamma)
    rng = np.random.default_rng(cfg.seed)
    source = _BatchSource(channel, alphabet, topology, s, S, cfg.N_batch, T, rng)

    samples = []
    while sum(x.shape[0] * x.shape[1] for x in samples) < cfg.n_norm:
        samples.append(source.draw()[0])
    mean, std = estimate_normalization(np.concatenate([x.reshape(-1, x.shape[-1]) for x in samples]))

    model = _starting_model(topology, init, rng)
    model.norm_mean, model.norm_std = mean, std
    adam = AdamState(beta1=cfg.beta1, beta2=cfg.beta2, eps=cfg.eps)
    logger.info(f"Stage {s}/{S}: training {model.num_parameters} parameters for {cfg.N_iter} iterations "
                f"(Gamma={topology.Gamma}, T_RNN={T}, N_batch={cfg.N_batch})")

    losses = []
    for it in range(cfg.N_iter):
        inputs, targets = source.draw()
        value, grads = backward(model, inputs, targets)
        if not np.isfinite(value):
            raise TrainingDivergedError(f"Stage {s}/{S}: loss became {value} at iteration {it}")
        model = model.with_params(adam_step(model.params, grads, adam, cfg.lr))
        losses.append(value)
        if cfg.log_every and (it + 1) % cfg.log_every == 0:
            logger.debug(f"Stage {s}/{S}: iteration {it + 1}, loss {np.mean(losses[-cfg.log_every:]):.4f} bits")

    return TrainResult(model=model, losses=losses)
