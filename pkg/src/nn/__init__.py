"""Periodically time-varying bidirectional RNN APP estimator."""

from .topology import (
    RnnTopology,
    ReferenceConfig,
    REFERENCE_TOPOLOGIES,
    reference_topology,
    count_multiplications,
    effective_memory,
)
from .model import RnnModel, init_model, param_shapes
from .inputs import build_inputs, known_offsets, input_lag, estimate_normalization, stage_targets
from .network import forward, forward_cached, backward, loss, predict_apps
from .adam import AdamState, adam_step
from .training import TrainConfig, TrainResult, train_stage
from .checkpoint import (
    CheckpointHeader,
    save_checkpoint,
    load_checkpoint,
    save_loss_trace,
)
from .equalizer import NnEqualizer

__all__ = [
    "RnnTopology",
    "ReferenceConfig",
    "REFERENCE_TOPOLOGIES",
    "reference_topology",
    "count_multiplications",
    "effective_memory",
    "RnnModel",
    "init_model",
    "param_shapes",
    "build_inputs",
    "known_offsets",
    "input_lag",
    "estimate_normalization",
    "stage_targets",
    "forward",
    "forward_cached",
    "backward",
    "loss",
    "predict_apps",
    "AdamState",
    "adam_step",
    "TrainConfig",
    "TrainResult",
    "train_stage",
    "CheckpointHeader",
    "save_checkpoint",
    "load_checkpoint",
    "save_loss_trace",
    "NnEqualizer",
]
