"""
Discrete transmit/receive filter synthesis.

The transmit filter is the DAC sinc pulse followed by the all-pass chromatic
dispersion response of the fiber. Taps are expressed in symbol-period units,
so with L_fib = 0 they are sinc(u / N_sim).
"""

from typing import Tuple

import numpy as np

from src.channel.spec import AnalogSpec


def frequency_grid(spec: AnalogSpec) -> Tuple[np.ndarray, float]:
    """Midpoint grid over [-N_sim/2, N_sim/2) in units of B.

    The point count is a multiple of 2*N_sim and at least grid_factor * K_g,
    which puts the band edges +-1/2 exactly on cell boundaries.
    """
    step = 2 * spec.N_sim
    count = step * int(np.ceil(spec.grid_factor * spec.taps_g / step))
    spacing = spec.N_sim / count
    freqs = -spec.N_sim / 2 + (np.arange(count) + 0.5) * spacing
    return freqs, spacing


def dispersion_response(spec: AnalogSpec, freqs: np.ndarray) -> np.ndarray:
    """G_SSMF(f) = exp(j beta2/2 (2 pi f)^2 L_fib) with f given in units of B."""
    omega = 2 * np.pi * freqs * spec.B
    return np.exp(1j * spec.beta2 / 2 * omega ** 2 * spec.L_fib)


def transmit_spectrum(spec: AnalogSpec) -> Tuple[np.ndarray, np.ndarray, float]:
    freqs, spacing = frequency_grid(spec)
    in_band = np.abs(freqs) <= 0.5
    spectrum = np.where(in_band, dispersion_response(spec, freqs), 0.0)
    return freqs, spectrum, spacing


def build_transmit_filter(spec: AnalogSpec) -> np.ndarray:
    """Taps g(u T_sim) for u in [-K_g//2, K_g//2], truncated symmetrically."""
    if spec.g_taps is not None:
        return np.asarray(spec.g_taps, dtype=complex)
    half = spec.K_g // 2
    u = np.arange(-half, half + 1)
    freqs, spectrum, spacing = transmit_spectrum(spec)
    band = spectrum != 0
    kernel = np.exp(2j * np.pi * np.outer(u / spec.N_sim, freqs[band]))
    return kernel @ spectrum[band] * spacing


def build_receive_filter(spec: AnalogSpec) -> np.ndarray:
    """Brick-wall receive filter of h_bandwidth * B, scaled by T_sim."""
    if spec.h_taps is not None:
        return np.asarray(spec.h_taps, dtype=complex)
    half = spec.K_h // 2
    u = np.arange(-half, half + 1)
    bw = spec.h_bandwidth
    return (bw / spec.N_sim * np.sinc(bw * u / spec.N_sim)).astype(complex)


def spectrum_energy(spec: AnalogSpec) -> float:
    """Total energy of g(t) by numeric integration of |G(f)|^2."""
    _, spectrum, spacing = transmit_spectrum(spec)
    return float(np.sum(np.abs(spectrum) ** 2) * spacing)


def tap_energy(taps: np.ndarray, N_sim: int) -> float:
    return float(np.sum(np.abs(taps) ** 2) / N_sim)


def filter_energy_fraction(spec: AnalogSpec) -> float:
    """Share of the transmit-filter energy kept by the truncated taps."""
    return tap_energy(build_transmit_filter(spec), spec.N_sim) / spectrum_energy(spec)
