"""
Tests for the time-varying bidirectional RNN: topology, inputs, gradients,
training and checkpoints
"""

import struct
from dataclasses import replace

import numpy as np
import pytest

from src.channel.model import build_channel, simulate_frame
from src.channel.profiles import tiny_profile
from src.errors import CheckpointError, ConfigError, ShapeMismatchError
from src.modem.alphabet import make_alphabet
from src.modem.source import calibrate_gain, draw_symbols, frame_from_indices
from src.nn.adam import AdamState, adam_step
from src.nn.checkpoint import load_checkpoint, save_checkpoint, save_loss_trace
from src.nn.equalizer import NnEqualizer
from src.nn.inputs import build_inputs, estimate_normalization, input_lag, known_offsets, stage_targets
from src.nn.model import RnnModel, init_model, param_shapes
from src.nn.network import backward, forward, forward_cached, loss, predict_apps
from src.nn.topology import (
    REFERENCE_TOPOLOGIES,
    RnnTopology,
    count_multiplications,
    effective_memory,
    reference_topology,
)
from src.nn.training import TrainConfig, train_stage
from src.sic.receiver import stage_input


@pytest.fixture
def tiny():
    return build_channel(tiny_profile(noise_sigma2=0.2))


@pytest.fixture
def small_topology():
    return RnnTopology(M=3, L_Y=2, L_IC=1, hidden=(4, 4), Gamma=2)


def _random_model(topology, seed=0, scale=0.5):
    rng = np.random.default_rng(seed)
    params = {k: scale * rng.standard_normal(s) for k, s in param_shapes(topology).items()}
    return RnnModel(topology, params)


def _contractive_model(topology, seed=0):
    """Random model whose state recursions forget the sequence ends quickly."""
    model = _random_model(topology, seed=seed)
    params = {k: (0.1 * v if k.endswith("_W") and not k.startswith("out_") else v) for k, v in model.params.items()}
    return model.with_params(params)


# topology and complexity

def test_reference_complexities():
    assert count_multiplications(reference_topology(4, 0.0, "PAM").topology()) == 5376
    assert count_multiplications(reference_topology(4, 30e3, "PAM").topology()) == 30976
    assert count_multiplications(reference_topology(8, 0.0, "ASK").topology()) == 31232
    sqam = RnnTopology(M=4, L_Y=32, L_IC=16, hidden=(64,), x_complex=True)
    assert sqam.input_size == 64
    assert count_multiplications(sqam) == 6400
    assert count_multiplications(reference_topology(4, 0.0, "PAM").topology(), S=2) == 2 * 5376


def test_reference_table_memory_column():
    for row in set(REFERENCE_TOPOLOGIES.values()):
        # fiber profiles oversample by N_os = 2
        assert effective_memory(row.L_Y, 2, row.T_RNN) == row.N_rnn
    assert effective_memory(32, 2, 32) == 47
    assert reference_topology(4, 30e3, "sqam").hidden == (256, 128, 128)
    assert reference_topology(3, 0.0, "PAM") is None


def test_topology_validation_and_stage_period(small_topology):
    with pytest.raises(ConfigError):
        RnnTopology(M=4, L_Y=8, L_IC=2, hidden=(5,))
    with pytest.raises(ConfigError):
        RnnTopology(M=4, L_Y=0, L_IC=2, hidden=(4,))
    assert small_topology.for_stage(1, 4).Gamma == 4
    assert small_topology.for_stage(4, 4).Gamma == 1
    assert replace(small_topology, time_varying=False).n_phases == 1
    assert RnnTopology.from_dict(small_topology.to_dict()) == small_topology


# inputs

def test_known_offsets_nearest_and_ties():
    np.testing.assert_array_equal(known_offsets(2, 2, 3, 2), [-1, 2])
    np.testing.assert_array_equal(known_offsets(2, 2, 2, 1), [-1])
    np.testing.assert_array_equal(known_offsets(2, 2, 2, 2), [-1, 1])
    np.testing.assert_array_equal(known_offsets(3, 3, 3, 3), [-2, -1, 1])
    assert known_offsets(1, 1, 2, 4).size == 0


def test_input_lag_points_at_strongest_tap(tiny):
    assert input_lag(tiny) == 1


def test_build_inputs_layout(tiny):
    alphabet = make_alphabet("ASK", 2)
    frame = frame_from_indices(alphabet, [1, 0, 1, 1, 0, 0], tiny)
    y = np.arange(1.0, 7.0)
    topology = RnnTopology(M=2, L_Y=3, L_IC=2, hidden=(2,), lag=input_lag(tiny))
    stage = stage_input(y, frame, 2, 2)
    inputs = build_inputs(stage, topology, N_os=1)
    assert inputs.shape == (3, 5)
    # kappa = 2: samples centred on slot 3, known symbols at 1 and 3
    np.testing.assert_allclose(inputs[0], [2.0, 3.0, 4.0, 1.0, 1.0])
    # kappa = 6: window runs past the block, known neighbour 7 lies outside
    np.testing.assert_allclose(inputs[2], [6.0, 0.0, 0.0, -1.0, 0.0])
    np.testing.assert_array_equal(stage_targets(stage, frame.indices), [0, 1, 0])


def test_build_inputs_stage_one_serializes_every_position(tiny):
    alphabet = make_alphabet("ASK", 2)
    frame = frame_from_indices(alphabet, [1, 0, 1, 1], tiny)
    topology = RnnTopology(M=2, L_Y=1, L_IC=3, hidden=(2,), Gamma=2)
    inputs = build_inputs(stage_input(np.ones(4), frame, 1, 2), topology, N_os=1)
    assert inputs.shape == (4, 4)
    np.testing.assert_allclose(inputs[:, 1:], 0.0)


def test_build_inputs_rejects_complex_outputs(tiny):
    frame = frame_from_indices(make_alphabet("ASK", 2), [1, 0], tiny)
    topology = RnnTopology(M=2, L_Y=2, L_IC=0, hidden=(2,))
    with pytest.raises(ShapeMismatchError):
        build_inputs(stage_input(np.array([1 + 1j, 2.0]), frame, 1, 1), topology, N_os=1)
    complex_topology = replace(topology, y_complex=True)
    inputs = build_inputs(stage_input(np.array([1 + 1j, 2.0]), frame, 1, 1), complex_topology, N_os=1)
    assert inputs.shape == (2, 4)


def test_normalization_statistics():
    data = np.array([[1.0, 5.0], [3.0, 5.0]])
    mean, std = estimate_normalization(data)
    np.testing.assert_allclose(mean, [2.0, 5.0])
    np.testing.assert_allclose(std, [1.0, 1.0])


# network

def test_zero_weights_give_uniform_apps(small_topology):
    model = init_model(small_topology, np.random.default_rng(0))
    zero = model.with_params({k: np.zeros_like(v) for k, v in model.params.items()})
    apps = predict_apps(zero, np.random.default_rng(1).standard_normal((6, 3)))
    np.testing.assert_allclose(apps.q, 1.0 / 3)
    assert apps.N == 3


def test_classic_model_equals_expanded_time_varying(small_topology):
    classic = _random_model(replace(small_topology, time_varying=False), seed=2)
    expanded = classic.expand_phases()
    assert expanded.topology.n_phases == 2
    x = np.random.default_rng(3).standard_normal((2, 6, 3))
    np.testing.assert_allclose(forward(classic, x), forward(expanded, x))


def test_time_varying_phases_matter(small_topology):
    model = _random_model(small_topology, seed=4)
    params = dict(model.params)
    params["fw0_W_in"] = params["fw0_W_in"].copy()
    params["fw0_W_in"][1] += 1.0
    x = np.random.default_rng(5).standard_normal((1, 4, 3))
    assert not np.allclose(forward(model, x), forward(model.with_params(params), x))


def test_forward_rejects_bad_shapes(small_topology):
    model = _random_model(small_topology)
    with pytest.raises(ShapeMismatchError):
        forward(model, np.zeros((1, 4, 2)))
    with pytest.raises(ShapeMismatchError):
        forward(model, np.zeros((1, 5, 3)))


def test_loss_is_mean_negative_log2_probability(small_topology):
    model = _random_model(small_topology, seed=6)
    x = np.random.default_rng(7).standard_normal((2, 4, 3))
    targets = np.array([[0, 2], [1, 1]])
    Q = forward(model, x)
    expected = -np.mean(np.log2(np.take_along_axis(Q, targets[..., None], axis=-1)))
    assert loss(model, x, targets) == pytest.approx(expected)


def _relu_pattern(model, x):
    return [np.concatenate([layer.active[d] for d in ("fw", "bw")]) for layer in forward_cached(model, x).layers]


def _same_relu_pattern(pattern, model, x):
    return all(np.array_equal(p, q) for p, q in zip(pattern, _relu_pattern(model, x)))


_GRADIENT_MODELS = [(Gamma, L, time_varying, seed)
                    for Gamma in (1, 2, 3) for L in (2, 3) for time_varying in (True, False)
                    for seed in (0, 1)]


@pytest.mark.parametrize("Gamma,L,time_varying,seed", _GRADIENT_MODELS)
def test_gradient_matches_finite_differences(Gamma, L, time_varying, seed):
    rng = np.random.default_rng(100 * Gamma + 10 * L + seed)
    topology = RnnTopology(M=3, L_Y=2, L_IC=1, hidden=(4,) * (L - 1), Gamma=Gamma, time_varying=time_varying)
    model = _random_model(topology, seed=int(rng.integers(1_000)))
    assert model.num_parameters <= 2000
    x = rng.standard_normal((2, 2 * Gamma, 3))
    targets = rng.integers(3, size=(2, 2))
    value, grads = backward(model, x, targets)
    assert value == pytest.approx(loss(model, x, targets))

    eps = 1e-6
    pattern = _relu_pattern(model, x)
    checked = 0
    for name, param in model.params.items():
        for i in range(param.size):
            plus = {k: v.copy() for k, v in model.params.items()}
            minus = {k: v.copy() for k, v in model.params.items()}
            plus[name].ravel()[i] += eps
            minus[name].ravel()[i] -= eps
            up, down = model.with_params(plus), model.with_params(minus)
            # skip coordinates whose perturbation crosses a ReLU kink
            if not (_same_relu_pattern(pattern, up, x) and _same_relu_pattern(pattern, down, x)):
                continue
            numeric = (loss(up, x, targets) - loss(down, x, targets)) / (2 * eps)
            assert grads[name].ravel()[i] == pytest.approx(numeric, rel=1e-4, abs=1e-7), (name, i)
            checked += 1
    assert checked >= 0.9 * model.num_parameters


def test_one_position_shift_rolls_the_phase_weights():
    topology = RnnTopology(M=3, L_Y=2, L_IC=1, hidden=(4, 4), Gamma=3)
    model = _contractive_model(topology, seed=12)
    rolled = model.with_params({k: (np.roll(v, -1, axis=0) if not k.startswith("out_") else v)
                                for k, v in model.params.items()})
    T = 120
    x = np.random.default_rng(13).standard_normal((1, T, 3))
    original = forward_cached(model, x).layers[-1].H
    shifted = forward_cached(rolled, x[:, 1:T - 2]).layers[-1].H
    interior = slice(30, T - 3 - 30)
    for d in ("fw", "bw"):
        np.testing.assert_allclose(shifted[d][:, interior], original[d][:, 1:T - 2][:, interior], atol=1e-9)


def test_period_shift_keeps_interior_outputs():
    topology = RnnTopology(M=3, L_Y=2, L_IC=1, hidden=(4, 4), Gamma=3)
    model = _contractive_model(topology, seed=14)
    x = np.random.default_rng(15).standard_normal((1, 120, 3))
    Q = forward(model, x)
    Q_shifted = forward(model, x[:, 3:])
    np.testing.assert_allclose(Q_shifted[:, 12:], Q[:, 13:], atol=1e-9)


def test_adam_first_step_moves_by_learning_rate():
    state = AdamState()
    params = {"w": np.array([1.0, -1.0])}
    out = adam_step(params, {"w": np.array([2.0, -0.5])}, state, lr=0.01)
    np.testing.assert_allclose(out["w"], [0.99, -0.99], atol=1e-8)
    assert state.t == 1
    np.testing.assert_allclose(params["w"], [1.0, -1.0])
    with pytest.raises(ShapeMismatchError):
        adam_step(params, {"v": np.zeros(2)}, state, lr=0.01)


# training

def test_snippet_length_rounding():
    assert TrainConfig(T_RNN=66).snippet_length(4) == 64
    assert TrainConfig(T_RNN=32).snippet_length(2) == 32
    with pytest.raises(ConfigError):
        TrainConfig(T_RNN=1).snippet_length(2)
    with pytest.raises(ConfigError):
        TrainConfig(lr=0.0)


def _train(tiny, iterations, seed=0, init=None, s=1):
    base = make_alphabet("PAM", 2)
    alphabet = base.with_gain(calibrate_gain(base, tiny, 4.0))
    topology = RnnTopology(M=2, L_Y=3, L_IC=2, hidden=(8,), lag=input_lag(tiny))
    cfg = TrainConfig(lr=1e-2, N_batch=8, N_iter=iterations, T_RNN=8, seed=seed, n_norm=200, log_every=0)
    return alphabet, train_stage(tiny, alphabet, 2, s, topology, cfg, init=init)


def test_training_is_deterministic_and_learns(tiny):
    _, first = _train(tiny, 150)
    _, again = _train(tiny, 150)
    np.testing.assert_allclose(first.losses, again.losses)
    assert first.model.topology.Gamma == 2
    assert np.all(np.isfinite(first.losses))
    assert np.mean(first.losses[-20:]) < np.mean(first.losses[:20])


def test_warm_start_keeps_weights_of_matching_topology(tiny):
    _, trained = _train(tiny, 5)
    _, warm = _train(tiny, 0, seed=1, init=trained.model)
    for name, value in trained.model.params.items():
        np.testing.assert_allclose(warm.model.params[name], value)
    # stage 2 has a different period, so the warm start is ignored
    _, fresh = _train(tiny, 0, seed=1, init=trained.model, s=2)
    assert fresh.model.topology.Gamma == 1


def test_equalizer_uses_one_network_per_stage(tiny):
    alphabet, trained = _train(tiny, 3)
    frame = draw_symbols(alphabet, 8, 0, tiny)
    y = simulate_frame(frame, tiny, 0)
    eq = NnEqualizer({1: trained.model}, N_os=1)
    apps = eq.stage_apps(stage_input(y, frame, 1, 2))
    assert apps.q.shape == (4, 2)
    assert eq.multiplications_per_app(2) == count_multiplications(trained.model.topology, 2)
    with pytest.raises(ConfigError):
        eq.stage_apps(stage_input(y, frame, 2, 2))
    with pytest.raises(ConfigError):
        NnEqualizer({1: trained.model}, N_os=1).stage_apps(stage_input(y, frame, 1, 1))


# checkpoints

def test_checkpoint_round_trip(tmp_path, small_topology):
    model = _random_model(small_topology, seed=10)
    model.norm_mean = np.array([0.1, 0.2, 0.3])
    model.norm_std = np.array([1.5, 2.0, 0.5])
    path = save_checkpoint(tmp_path / "stage1.sicrnn", model, train_config={"seed": 4}, extra={"snr_db": 7.5})
    loaded, header = load_checkpoint(path, expected=small_topology)
    assert header.Gamma == 2 and header.n_phases == 2 and header.seed == 4
    assert header.extra["snr_db"] == 7.5
    for name, value in model.params.items():
        np.testing.assert_array_equal(loaded.params[name], value)
    np.testing.assert_array_equal(loaded.norm_std, model.norm_std)
    x = np.random.default_rng(0).standard_normal((1, 4, 3))
    np.testing.assert_allclose(forward(loaded, x), forward(model, x))


def test_checkpoint_errors(tmp_path, small_topology):
    model = _random_model(small_topology)
    path = save_checkpoint(tmp_path / "m.sicrnn", model)
    data = path.read_bytes()

    bad = tmp_path / "bad.sicrnn"
    bad.write_bytes(b"NOTNET" + data[6:])
    with pytest.raises(CheckpointError):
        load_checkpoint(bad)

    bad.write_bytes(data[:6] + struct.pack("<I", 99) + data[10:])
    with pytest.raises(CheckpointError):
        load_checkpoint(bad)

    bad.write_bytes(data[:-8])
    with pytest.raises(CheckpointError):
        load_checkpoint(bad)

    bad.write_bytes(data + b"\x00" * 8)
    with pytest.raises(CheckpointError):
        load_checkpoint(bad)

    with pytest.raises(CheckpointError):
        load_checkpoint(path, expected=replace(small_topology, Gamma=3))

    with pytest.raises(CheckpointError):
        load_checkpoint(tmp_path / "missing.sicrnn")


def test_loss_trace_csv(tmp_path):
    path = save_loss_trace(tmp_path / "trace.loss.csv", [1.0, 0.5])
    lines = path.read_text().splitlines()
    assert lines[0] == "iteration,loss_bits"
    assert len(lines) == 3
