"""
Parameter containers of the bidirectional time-varying RNN.

Per recurrent layer i and direction d in (fw, bw) the parameters are stacked
over the weight phases:
    {d}{i}_W_in  (P, h, l_i)    input map
    {d}{i}_b_in  (P, h)
    {d}{i}_W     (P, h, h)      state recursion
    {d}{i}_b     (P, h)
with h = l_{i+1} / 2 and P = n_phases. The softmax head is out_W (M, l_L)
and out_b (M,).
"""

from collections import OrderedDict
from dataclasses import dataclass, field, replace
from typing import Dict, Optional, Tuple

import numpy as np

from src.errors import ShapeMismatchError
from src.nn.topology import RnnTopology

Params = Dict[str, np.ndarray]
DIRECTIONS = ("fw", "bw")


def param_shapes(topology: RnnTopology) -> "OrderedDict[str, Tuple[int, ...]]":
    """Declared parameter order and shapes (also the checkpoint block order)."""
    P = topology.n_phases
    shapes = OrderedDict()
    sizes = topology.layer_sizes
    for i, (l_in, l_out) in enumerate(zip(sizes[:-1], sizes[1:])):
        h = l_out // 2
        for d in DIRECTIONS:
            shapes[f"{d}{i}_W_in"] = (P, h, l_in)
            shapes[f"{d}{i}_b_in"] = (P, h)
            shapes[f"{d}{i}_W"] = (P, h, h)
            shapes[f"{d}{i}_b"] = (P, h)
    shapes["out_W"] = (topology.M, sizes[-1])
    shapes["out_b"] = (topology.M,)
    return shapes


@dataclass
class RnnModel:
    topology: RnnTopology
    params: Params
    norm_mean: np.ndarray = field(default=None)
    norm_std: np.ndarray = field(default=None)

    def __post_init__(self):
        l1 = self.topology.input_size
        if self.norm_mean is None:
            self.norm_mean = np.zeros(l1)
        if self.norm_std is None:
            self.norm_std = np.ones(l1)
        expected = param_shapes(self.topology)
        if set(expected) != set(self.params):
            raise ShapeMismatchError(f"Parameter names {sorted(self.params)} do not match topology")
        for name, shape in expected.items():
            if self.params[name].shape != shape:
                raise ShapeMismatchError(f"{name}: expected {shape}, got {self.params[name].shape}")
        if self.norm_mean.shape != (l1,) or self.norm_std.shape != (l1,):
            raise ShapeMismatchError(f"Normalization statistics must have length {l1}")

    @property
    def num_parameters(self) -> int:
        return int(sum(p.size for p in self.params.values()))

    def normalize(self, inputs: np.ndarray) -> np.ndarray:
        return (inputs - self.norm_mean) / self.norm_std

    def copy(self) -> "RnnModel":
        return RnnModel(self.topology, {k: v.copy() for k, v in self.params.items()},
                        self.norm_mean.copy(), self.norm_std.copy())

    def with_params(self, params: Params) -> "RnnModel":
        return RnnModel(self.topology, params, self.norm_mean, self.norm_std)

    def expand_phases(self, Gamma: Optional[int] = None) -> "RnnModel":
        """Time-varying model whose phases all carry this classic model's weights."""
        if self.topology.n_phases != 1:
            raise ShapeMismatchError("Only single-phase models can be expanded")
        topo = replace(self.topology, Gamma=Gamma or self.topology.Gamma, time_varying=True)
        P = topo.n_phases
        params = {k: (np.repeat(v, P, axis=0) if not k.startswith("out_") else v.copy())
                  for k, v in self.params.items()}
        return RnnModel(topo, params, self.norm_mean.copy(), self.norm_std.copy())


def init_model(topology: RnnTopology, rng: np.random.Generator) -> RnnModel:
    """He-scaled input maps, scaled-down recursions and zero biases."""
    params = {}
    for name, shape in param_shapes(topology).items():
        if name.endswith("_b") or name.endswith("_b_in"):
            params[name] = np.zeros(shape)
        elif name.endswith("_W_in") or name == "out_W":
            fan_in = shape[-1]
            params[name] = rng.standard_normal(shape) * np.sqrt(2.0 / fan_in)
        else:
            params[name] = rng.standard_normal(shape) * (0.5 / np.sqrt(shape[-1]))
    return RnnModel(topology, params)
