"""
Tests for channel synthesis, simulation and the auxiliary channel model
"""

import numpy as np
import pytest
from scipy.stats import norm

from src.channel.auxiliary import make_auxiliary
from src.channel.filters import build_transmit_filter, filter_energy_fraction
from src.channel.model import (
    add_noise,
    apply_nonlinearity,
    build_channel,
    noiseless_mean,
    noiseless_output,
    simulate_frame,
    slot_log_likelihood,
)
from src.channel.profiles import fiber_profile, profile_spec, tiny_profile, wireless_pa_profile
from src.channel.spec import AnalogSpec, Nonlinearity, NonlinearityKind
from src.errors import ChannelError, ConfigError
from src.modem.alphabet import make_alphabet
from src.modem.source import draw_symbols, frame_from_indices


@pytest.fixture
def tiny():
    return build_channel(tiny_profile())


@pytest.mark.parametrize("L_fib", [0.0, 30e3])
def test_fiber_filter_energy_fraction(L_fib):
    # 151 symbols keep 99.87% of the sinc energy; 99.9% needs about 250
    assert filter_energy_fraction(fiber_profile(L_fib=L_fib)) >= 0.998


def test_filter_energy_fraction_grows_with_the_window():
    fractions = [filter_energy_fraction(fiber_profile(L_fib=30e3, memory_symbols=k)) for k in (51, 151, 301)]
    assert fractions[0] < fractions[1] < fractions[2]
    assert fractions[2] >= 0.999


def test_b2b_filter_is_sampled_sinc():
    spec = fiber_profile(L_fib=0.0, memory_symbols=11)
    g = build_transmit_filter(spec)
    u = np.arange(-11, 12)
    np.testing.assert_allclose(g.real, np.sinc(u / 2), atol=1e-3)
    assert np.max(np.abs(g.imag)) < 1e-9


def test_fiber_memory_bookkeeping():
    channel = build_channel(fiber_profile(L_fib=0.0))
    assert channel.Ktilde == 151
    assert channel.memory == 151
    assert channel.output_is_real


def test_tiny_channel_alignment(tiny):
    alphabet = make_alphabet("ASK", 2)
    frame = frame_from_indices(alphabet, [1, 0, 0, 1, 1, 0], tiny)
    y = noiseless_output(frame, tiny)
    x = np.concatenate([[0.0, 0.0], frame.x.real])
    expected = 0.4 * x[:-2] + x[1:-1] + 0.4 * x[2:]
    np.testing.assert_allclose(y, expected)
    assert tiny.memory == 2 and tiny.guard == 1


def test_slot_mean_matches_simulation_on_complex_profile():
    channel = build_channel(wireless_pa_profile(memory_symbols=4))
    alphabet = make_alphabet("SQAM", 8).with_gain(0.4)
    frame = draw_symbols(alphabet, 30, 1, channel)
    y = noiseless_output(frame, channel).reshape(-1, channel.spec.N_os)
    K = channel.memory
    padded = np.concatenate([np.zeros(K, dtype=complex), frame.x])
    for k in range(frame.n):
        np.testing.assert_allclose(noiseless_mean(padded[k:k + K + 1], channel), y[k], atol=1e-10)


def test_noiseless_mean_rejects_wrong_window(tiny):
    with pytest.raises(ChannelError):
        noiseless_mean(np.zeros(2), tiny)


def test_nonlinearities():
    z = np.array([1 + 1j, 2.0])
    np.testing.assert_allclose(apply_nonlinearity(z, Nonlinearity(NonlinearityKind.SLD)), [2.0, 4.0])
    rapp = apply_nonlinearity(np.array([1j]), Nonlinearity(NonlinearityKind.RAPP, p=2.0))
    assert abs(rapp[0]) == pytest.approx(2 ** -0.25)
    assert np.angle(rapp[0]) == pytest.approx(np.pi / 2)
    np.testing.assert_allclose(apply_nonlinearity(z, Nonlinearity(NonlinearityKind.IDENTITY)), z)


def _autocovariance(y, lag):
    return float(np.mean(y[lag:] * np.conj(y[:y.size - lag])).real)


def test_noise_only_fiber_output_is_white():
    channel = build_channel(fiber_profile(L_fib=0.0, noise_sigma2=1.0))
    assert channel.spec.N_os == 2 and channel.output_is_real
    silent = frame_from_indices(make_alphabet("PAM", 2), np.zeros(100_000, dtype=int), channel)
    y = simulate_frame(silent, channel, 0)
    assert y.size == 200_000 and np.isrealobj(y)
    assert _autocovariance(y, 0) == pytest.approx(1.0, abs=0.01)
    stderr = 1.0 / np.sqrt(y.size)
    for lag in range(1, 11):
        assert abs(_autocovariance(y, lag)) < 3 * stderr, lag


def test_complex_noise_is_circular():
    rng = np.random.default_rng(0)
    cplx = add_noise(np.zeros(200_000, dtype=complex), 2.0, False, rng)
    assert np.mean(np.abs(cplx) ** 2) == pytest.approx(2.0, rel=0.02)
    assert abs(np.mean(cplx ** 2)) < 0.05


def test_simulate_frame_is_deterministic(tiny):
    frame = draw_symbols(make_alphabet("PAM", 4), 50, 0, tiny)
    np.testing.assert_array_equal(simulate_frame(frame, tiny, 9), simulate_frame(frame, tiny, 9))


def test_slot_log_likelihood_real_gaussian():
    y = np.array([0.3, -1.2])
    means = np.array([[0.0, 0.0], [1.0, -1.0]])
    expected = norm.logpdf(y, loc=means, scale=np.sqrt(0.7)).sum(axis=1)
    np.testing.assert_allclose(slot_log_likelihood(y, means, 0.7, True), expected)


def test_slot_log_likelihood_complex_gaussian():
    y = np.array([0.5 + 0.5j])
    means = np.array([[0.0]])
    expected = -0.5 / 2.0 - np.log(np.pi * 2.0)
    np.testing.assert_allclose(slot_log_likelihood(y, means, 2.0, False), [expected])


def test_auxiliary_exact_model(tiny):
    aux = make_auxiliary(tiny, make_alphabet("PAM", 4))
    assert aux.exact and aux.D == 0 and aux.memory == 2
    np.testing.assert_allclose(aux.offset, 0.0)


def test_auxiliary_mismatched_model(tiny):
    alphabet = make_alphabet("PAM", 4)
    aux = make_auxiliary(tiny, alphabet, 0)
    assert aux.memory == 0 and aux.D == 1
    # dropped neighbours are replaced by the alphabet mean 1.5
    np.testing.assert_allclose(aux.mean_batch(np.array([[2.0 + 0j]])), [[2.0 + 0.8 * 1.5]])

    aux1 = make_auxiliary(tiny, alphabet, 1)
    assert aux1.memory == 1 and aux1.D == 0


def test_auxiliary_rejects_bad_memory(tiny):
    with pytest.raises(ChannelError):
        make_auxiliary(tiny, make_alphabet("PAM", 2), 3)


def test_spec_validation():
    with pytest.raises(ChannelError):
        AnalogSpec(N_sim=3, N_os=2)
    with pytest.raises(ChannelError):
        AnalogSpec(K_g=4)
    with pytest.raises(ChannelError):
        AnalogSpec(noise_sigma2=-1.0)
    with pytest.raises(ChannelError):
        Nonlinearity.parse("cubic")


def test_profile_lookup():
    assert profile_spec("fiber").L_fib == 30e3
    assert profile_spec("fiber", L_fib=10e3).L_fib == 10e3
    assert profile_spec("FIBER-B2B").L_fib == 0.0
    assert not profile_spec("wireless-pa").noise_real
    with pytest.raises(ConfigError):
        profile_spec("coax")
