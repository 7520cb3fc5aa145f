"""
Adam optimizer over parameter dictionaries.
"""

from dataclasses import dataclass, field

import numpy as np

from src.errors import ShapeMismatchError
from src.nn.model import Params


@dataclass
class AdamState:
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    t: int = 0
    m: Params = field(default_factory=dict)
    v: Params = field(default_factory=dict)


def adam_step(params: Params, grads: Params, state: AdamState, lr: float) -> Params:
    """One bias-corrected Adam update; returns new arrays and advances state."""
    if set(grads) != set(params):
        raise ShapeMismatchError("Gradient and parameter names differ")
    state.t += 1
    c1 = 1.0 - state.beta1 ** state.t
    c2 = 1.0 - state.beta2 ** state.t
    updated = {}
    for name, p in params.items():
        g = grads[name]
        if g.shape != p.shape:
            raise ShapeMismatchError(f"{name}: gradient {g.shape} vs parameter {p.shape}")
        m = state.beta1 * state.m.get(name, np.zeros_like(p)) + (1.0 - state.beta1) * g
        v = state.beta2 * state.v.get(name, np.zeros_like(p)) + (1.0 - state.beta2) * g * g
        state.m[name], state.v[name] = m, v
        updated[name] = p - lr * (m / c1) / (np.sqrt(v / c2) + state.eps)
    return updated
