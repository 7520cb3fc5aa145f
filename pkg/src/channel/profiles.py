"""
Named channel profiles.

fiber / fiber-b2b follow the short-reach direct-detection link (35 GBd,
SSMF dispersion, square-law detector, real post-detection noise);
wireless-pa is the PA-saturation transmitter with complex noise; tiny builds
short explicit-tap channels for oracle checks.
"""

from typing import Dict, Optional, Sequence

from src.channel.spec import AnalogSpec, Nonlinearity, NonlinearityKind
from src.errors import ConfigError

FIBER_DEFAULTS: Dict[str, float] = {
    "B": 35e9,
    "beta2": -2.168e-26,  # s^2/m
    "N_sim": 2,
    "N_os": 2,
    "memory_symbols": 151,
}


def fiber_profile(L_fib: float = 30e3, noise_sigma2: float = 1.0, memory_symbols: int = 151) -> AnalogSpec:
    N_sim = int(FIBER_DEFAULTS["N_sim"])
    return AnalogSpec(
        B=FIBER_DEFAULTS["B"],
        N_sim=N_sim,
        N_os=int(FIBER_DEFAULTS["N_os"]),
        L_fib=L_fib,
        beta2=FIBER_DEFAULTS["beta2"],
        K_g=memory_symbols * N_sim + 1,
        K_h=1,
        nonlinearity=Nonlinearity(NonlinearityKind.SLD),
        noise_sigma2=noise_sigma2,
        noise_real=True,
        h_bandwidth=2.0,
    )


def wireless_pa_profile(p: float = 2.0, noise_sigma2: float = 1.0, memory_symbols: int = 8) -> AnalogSpec:
    N_sim = 4
    return AnalogSpec(
        B=1.0,
        N_sim=N_sim,
        N_os=2,
        L_fib=0.0,
        K_g=memory_symbols * N_sim + 1,
        K_h=2 * N_sim + 1,
        nonlinearity=Nonlinearity(NonlinearityKind.RAPP, p=p),
        noise_sigma2=noise_sigma2,
        noise_real=False,
        h_bandwidth=2.0,
    )


def tiny_profile(g_taps: Sequence[complex] = (0.4, 1.0, 0.4),
                 h_taps: Sequence[complex] = (1.0,),
                 N_sim: int = 1,
                 N_os: int = 1,
                 nonlinearity: str = "identity",
                 noise_sigma2: float = 1.0,
                 noise_real: bool = True) -> AnalogSpec:
    return AnalogSpec(
        B=1.0,
        N_sim=N_sim,
        N_os=N_os,
        nonlinearity=Nonlinearity.parse(nonlinearity),
        noise_sigma2=noise_sigma2,
        noise_real=noise_real,
        g_taps=tuple(complex(t) for t in g_taps),
        h_taps=tuple(complex(t) for t in h_taps),
    )


def profile_spec(name: str, L_fib: Optional[float] = None, **kwargs) -> AnalogSpec:
    """Look up a profile by name."""
    key = name.lower()
    if key == "fiber":
        return fiber_profile(L_fib=30e3 if L_fib is None else L_fib, **kwargs)
    if key == "fiber-b2b":
        return fiber_profile(L_fib=0.0, **kwargs)
    if key == "wireless-pa":
        return wireless_pa_profile(**kwargs)
    if key == "tiny":
        return tiny_profile(**kwargs)
    raise ConfigError(f"Unknown channel profile: {name}")
