"""
Oversampled nonlinear channel: discrete filters, memory bookkeeping,
frame simulation and noiseless slot means.

Receiver samples are aligned causally: the N_os samples of slot k depend
only on the symbols x_{k-memory}, ..., x_k.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from loguru import logger

from src.channel.filters import build_receive_filter, build_transmit_filter
from src.channel.spec import AnalogSpec, Nonlinearity, NonlinearityKind
from src.errors import ChannelError
from src.modem.source import Frame


def apply_nonlinearity(z: np.ndarray, kind: Nonlinearity) -> np.ndarray:
    """Pointwise memoryless device."""
    z = np.asarray(z)
    if kind.kind == NonlinearityKind.SLD:
        return np.abs(z) ** 2
    if kind.kind == NonlinearityKind.RAPP:
        mag = np.abs(z)
        two_p = 2.0 * kind.p
        out_mag = mag / (1.0 + mag ** two_p) ** (1.0 / two_p)
        return out_mag * np.exp(1j * np.angle(z))
    return z


@dataclass(frozen=True)
class SlotResponse:
    """Linear maps from a symbol window to one slot's receiver samples.

    window (K+1 symbols, oldest first) -> pre-nonlinearity samples via A,
    post-nonlinearity samples -> N_os outputs via H.
    """
    A: np.ndarray
    H: np.ndarray


@dataclass(frozen=True)
class DiscreteChannel:
    spec: AnalogSpec
    g: np.ndarray
    h: np.ndarray
    response: SlotResponse = field(repr=False)

    @property
    def Ktilde_g(self) -> int:
        return (self.g.size - 1) // self.spec.N_sim

    @property
    def Ktilde_h(self) -> int:
        return (self.h.size - 1) // self.spec.N_sim

    @property
    def Ktilde(self) -> int:
        """Total system memory K_g~ + K_h~."""
        return self.Ktilde_g + self.Ktilde_h

    @property
    def k0(self) -> int:
        d = self.spec.d
        return int((self.g.size // 2) / d + (self.h.size // 2) / d)

    @property
    def guard(self) -> int:
        """Zero simulation samples before and after each block."""
        return self.g.size // 2 + self.h.size // 2

    @property
    def delay(self) -> int:
        """Offset (in T_sim) of the first sample of a slot from its symbol."""
        return self.spec.d - 1 - self.guard

    @property
    def memory(self) -> int:
        """Exact number of past symbols a slot depends on.

        Equals Ktilde for all shipped profiles; can exceed it by one when
        both filters are long and N_os < N_sim.
        """
        return (2 * self.guard + 1 - self.spec.d) // self.spec.N_sim

    @property
    def output_is_real(self) -> bool:
        return self.spec.noise_real

    @property
    def sigma2(self) -> float:
        return self.spec.noise_sigma2


def _slot_response(spec: AnalogSpec, g: np.ndarray, h: np.ndarray, memory: int, delay: int) -> SlotResponse:
    Lg, Lh = g.size // 2, h.size // 2
    d, N_sim, N_os = spec.d, spec.N_sim, spec.N_os
    sample_times = delay + d * np.arange(N_os)
    times = np.arange(delay - Lh, sample_times[-1] + Lh + 1)
    positions = (np.arange(memory + 1) - memory) * N_sim

    lag = times[:, None] - positions[None, :] + Lg
    valid = (lag >= 0) & (lag < g.size)
    A = np.where(valid, g[np.clip(lag, 0, g.size - 1)], 0.0)

    lag_h = sample_times[:, None] - times[None, :] + Lh
    valid_h = (lag_h >= 0) & (lag_h < h.size)
    H = np.where(valid_h, h[np.clip(lag_h, 0, h.size - 1)], 0.0)
    return SlotResponse(A=A, H=H)


def build_channel(spec: AnalogSpec) -> DiscreteChannel:
    """Synthesize filters and precompute the slot response."""
    g = build_transmit_filter(spec)
    h = build_receive_filter(spec)
    guard = g.size // 2 + h.size // 2
    memory = (2 * guard + 1 - spec.d) // spec.N_sim
    delay = spec.d - 1 - guard
    response = _slot_response(spec, g, h, memory, delay)
    channel = DiscreteChannel(spec=spec, g=g, h=h, response=response)
    logger.debug(f"Built channel: K_g={g.size}, K_h={h.size}, Ktilde={channel.Ktilde}, "
                 f"memory={memory}, nonlinearity={spec.nonlinearity.kind.value}")
    return channel


def upsample(frame: Frame, channel: DiscreteChannel) -> np.ndarray:
    """N_sim-fold zero-insertion upsampling with guard zeros on both sides."""
    N_sim = channel.spec.N_sim
    x_up = np.zeros(2 * channel.guard + frame.n * N_sim, dtype=complex)
    x_up[channel.guard: channel.guard + frame.n * N_sim: N_sim] = frame.x
    return x_up


def transmit_waveform(frame: Frame, channel: DiscreteChannel) -> np.ndarray:
    """x(i T_sim) before the nonlinearity, including the guard intervals."""
    return np.convolve(upsample(frame, channel), channel.g)


def noiseless_output(frame: Frame, channel: DiscreteChannel) -> np.ndarray:
    """Noiseless, aligned receiver samples of length N_os * n."""
    if frame.guard != channel.guard:
        raise ChannelError(f"Frame guard {frame.guard} does not match channel guard {channel.guard}")
    z = apply_nonlinearity(transmit_waveform(frame, channel), channel.spec.nonlinearity)
    y_full = np.convolve(z, channel.h)
    d = channel.spec.d
    start = channel.guard + d - 1
    idx = start + d * np.arange(frame.n * channel.spec.N_os)
    y = y_full[idx]
    return y.real if channel.output_is_real else y


def add_noise(y: np.ndarray, sigma2: float, real: bool, rng: np.random.Generator) -> np.ndarray:
    if sigma2 == 0:
        return y.copy()
    if real:
        return y + np.sqrt(sigma2) * rng.standard_normal(y.shape)
    scale = np.sqrt(sigma2 / 2)
    return y + scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))


def simulate_frame(frame: Frame, channel: DiscreteChannel, seed) -> np.ndarray:
    """Noisy receiver samples y (length N_os * n) for one frame."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    y = noiseless_output(frame, channel)
    return add_noise(y, channel.sigma2, channel.output_is_real, rng)


def slots(y: np.ndarray, channel: DiscreteChannel) -> np.ndarray:
    """Group y into per-symbol slots of N_os samples, shape (n, N_os)."""
    N_os = channel.spec.N_os
    if y.size % N_os:
        raise ChannelError(f"Output length {y.size} not divisible by N_os={N_os}")
    return y.reshape(-1, N_os)


def mean_batch(windows: np.ndarray, A: np.ndarray, H: np.ndarray,
               nonlinearity: Nonlinearity, real: bool,
               offset: Optional[np.ndarray] = None) -> np.ndarray:
    """Slot means for a batch of windows, shape (..., K+1) -> (..., N_os)."""
    x = windows @ A.T
    if offset is not None:
        x = x + offset
    out = apply_nonlinearity(x, nonlinearity) @ H.T
    return out.real if real else out


def noiseless_mean(window: np.ndarray, channel: DiscreteChannel) -> np.ndarray:
    """Noiseless receiver samples of one slot given its symbol window.

    window holds memory + 1 channel-input symbols, oldest first.
    """
    window = np.asarray(window, dtype=complex)
    if window.shape[-1] != channel.memory + 1:
        raise ChannelError(f"Window length {window.shape[-1]} != memory + 1 = {channel.memory + 1}")
    return mean_batch(window, channel.response.A, channel.response.H,
                      channel.spec.nonlinearity, channel.output_is_real)


def slot_log_likelihood(y_slot: np.ndarray, means: np.ndarray, sigma2: float, real: bool) -> np.ndarray:
    """Gaussian log-density of one slot for each candidate mean, shape (...)."""
    diff = np.abs(y_slot - means) ** 2
    N_os = diff.shape[-1]
    if real:
        return -diff.sum(axis=-1) / (2 * sigma2) - 0.5 * N_os * np.log(2 * np.pi * sigma2)
    return -diff.sum(axis=-1) / sigma2 - N_os * np.log(np.pi * sigma2)
