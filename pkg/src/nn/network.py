"""
Forward pass and reverse-mode differentiation of the bidirectional
time-varying RNN.

Serialized position tau carries phase p = tau mod P. The forward path uses
the input map of phase p and the state recursion of the previous position's
phase (tau - 1) mod P; the backward path mirrors this with (tau + 1) mod P.
First forward and last backward states are zero, their state biases are still
added. The softmax head is evaluated at phase 0 positions only.
"""

from dataclasses import dataclass
from typing import Dict, List, Tuple

import numpy as np
from scipy.special import log_softmax, softmax

from src.errors import ShapeMismatchError
from src.nn.model import DIRECTIONS, Params, RnnModel
from src.sic.apps import AppMatrix


@dataclass
class _LayerCache:
    X: np.ndarray
    H: Dict[str, np.ndarray]
    active: Dict[str, np.ndarray]


@dataclass
class ForwardCache:
    layers: List[_LayerCache]
    Z: np.ndarray
    Q: np.ndarray
    log_Q: np.ndarray


def _as_batch(model: RnnModel, inputs: np.ndarray) -> np.ndarray:
    x = np.asarray(inputs, dtype=float)
    if x.ndim == 2:
        x = x[None]
    topo = model.topology
    if x.ndim != 3 or x.shape[-1] != topo.input_size:
        raise ShapeMismatchError(f"Inputs of shape {x.shape} do not match l_1={topo.input_size}")
    if x.shape[1] % topo.Gamma:
        raise ShapeMismatchError(f"Sequence length {x.shape[1]} is not a multiple of Gamma={topo.Gamma}")
    return x


def _recurrent_pass(params: Params, prefix: str, X: np.ndarray, P: int, reverse: bool):
    W_in, b_in = params[f"{prefix}_W_in"], params[f"{prefix}_b_in"]
    W, b = params[f"{prefix}_W"], params[f"{prefix}_b"]
    B, T, _ = X.shape
    h = W.shape[-1]
    H = np.zeros((B, T, h))
    active = np.zeros((B, T, h), dtype=bool)
    state = np.zeros((B, h))
    step = 1 if reverse else -1
    order = range(T - 1, -1, -1) if reverse else range(T)
    for tau in order:
        p, q = tau % P, (tau + step) % P
        a = X[:, tau] @ W_in[p].T + b_in[p] + state @ W[q].T + b[q]
        active[:, tau] = a > 0
        state = np.where(active[:, tau], a, 0.0)
        H[:, tau] = state
    return H, active


def forward_cached(model: RnnModel, inputs: np.ndarray) -> ForwardCache:
    topo, params = model.topology, model.params
    X = model.normalize(_as_batch(model, inputs))
    P = topo.n_phases
    layers = []
    for i in range(topo.L - 1):
        H, active = {}, {}
        for d in DIRECTIONS:
            H[d], active[d] = _recurrent_pass(params, f"{d}{i}", X, P, reverse=(d == "bw"))
        layers.append(_LayerCache(X=X, H=H, active=active))
        X = np.concatenate([H["fw"], H["bw"]], axis=-1)

    Z = X[:, ::topo.Gamma]
    logits = Z @ params["out_W"].T + params["out_b"]
    return ForwardCache(layers=layers, Z=Z, Q=softmax(logits, axis=-1), log_Q=log_softmax(logits, axis=-1))


def forward(model: RnnModel, inputs: np.ndarray) -> np.ndarray:
    """Softmax outputs at the stage-s positions, shape (B, N, M)."""
    return forward_cached(model, inputs).Q


def predict_apps(model: RnnModel, inputs: np.ndarray) -> AppMatrix:
    """APPs of one serialized sequence."""
    return AppMatrix.from_weights(forward(model, inputs)[0])


def loss(model: RnnModel, inputs: np.ndarray, targets: np.ndarray) -> float:
    """Mean negative log2-probability of the true symbols."""
    return _loss_from(forward_cached(model, inputs), targets)


def _loss_from(cache: ForwardCache, targets: np.ndarray) -> float:
    targets = np.atleast_2d(targets)
    picked = np.take_along_axis(cache.log_Q, targets[..., None], axis=-1)
    return float(-picked.mean() / np.log(2))


def backward(model: RnnModel, inputs: np.ndarray, targets: np.ndarray) -> Tuple[float, Params]:
    """Loss and its exact gradient with respect to every parameter (BPTT)."""
    topo, params = model.topology, model.params
    cache = forward_cached(model, inputs)
    targets = np.atleast_2d(np.asarray(targets, dtype=int))
    if targets.shape != cache.Q.shape[:2]:
        raise ShapeMismatchError(f"Targets of shape {targets.shape} do not match outputs {cache.Q.shape[:2]}")
    B, N, M = cache.Q.shape
    P = topo.n_phases
    grads = {k: np.zeros_like(v) for k, v in params.items()}

    onehot = np.eye(M)[targets]
    d_logits = (cache.Q - onehot) / (B * N * np.log(2))
    grads["out_W"] = np.einsum("bnm,bnl->ml", d_logits, cache.Z)
    grads["out_b"] = d_logits.sum(axis=(0, 1))

    T = cache.layers[-1].X.shape[1]
    d_next = np.zeros((B, T, cache.Z.shape[-1]))
    d_next[:, ::topo.Gamma] = d_logits @ params["out_W"]

    for i in range(topo.L - 2, -1, -1):
        layer = cache.layers[i]
        h = topo.layer_sizes[i + 1] // 2
        dX = np.zeros_like(layer.X)
        for d, dH in (("fw", d_next[..., :h]), ("bw", d_next[..., h:])):
            prefix = f"{d}{i}"
            W_in, W = params[f"{prefix}_W_in"], params[f"{prefix}_W"]
            gW_in, gb_in = grads[f"{prefix}_W_in"], grads[f"{prefix}_b_in"]
            gW, gb = grads[f"{prefix}_W"], grads[f"{prefix}_b"]
            H, active = layer.H[d], layer.active[d]
            reverse = d == "bw"
            step = 1 if reverse else -1
            order = range(T) if reverse else range(T - 1, -1, -1)
            carry = np.zeros((B, h))
            for tau in order:
                p, q = tau % P, (tau + step) % P
                da = (dH[:, tau] + carry) * active[:, tau]
                gW_in[p] += da.T @ layer.X[:, tau]
                gb_in[p] += da.sum(axis=0)
                gb[q] += da.sum(axis=0)
                prev = tau + step
                if 0 <= prev < T:
                    gW[q] += da.T @ H[:, prev]
                carry = da @ W[q]
                dX[:, tau] += da @ W_in[p]
        d_next = dX

    return _loss_from(cache, targets), grads
