"""Channel construction and simulation."""

from .spec import AnalogSpec, Nonlinearity, NonlinearityKind
from .filters import (
    build_transmit_filter,
    build_receive_filter,
    spectrum_energy,
    tap_energy,
    filter_energy_fraction,
)
from .model import (
    DiscreteChannel,
    build_channel,
    apply_nonlinearity,
    transmit_waveform,
    noiseless_output,
    simulate_frame,
    noiseless_mean,
    slots,
    slot_log_likelihood,
)
from .auxiliary import AuxiliaryChannel, make_auxiliary
from .profiles import fiber_profile, wireless_pa_profile, tiny_profile, profile_spec

__all__ = [
    "AnalogSpec",
    "Nonlinearity",
    "NonlinearityKind",
    "build_transmit_filter",
    "build_receive_filter",
    "spectrum_energy",
    "tap_energy",
    "filter_energy_fraction",
    "DiscreteChannel",
    "build_channel",
    "apply_nonlinearity",
    "transmit_waveform",
    "noiseless_output",
    "simulate_frame",
    "noiseless_mean",
    "slots",
    "slot_log_likelihood",
    "AuxiliaryChannel",
    "make_auxiliary",
    "fiber_profile",
    "wireless_pa_profile",
    "tiny_profile",
    "profile_spec",
]
