"""Rate-equation model of microwave cooling in a driven four-level flux qubit."""

from .dynamics import SteadyState, effective_temperature, equilibrium_p11, steady_state, time_evolve
from .errors import ComputeError, FluxCoolError, InputError
from .model import DriveConfig, FluxQubitModel, Method, Waveform, ang, build_channels, reference_model, to_ghz
from .rates import Activation, RateSet, airy_rate, assemble_generator, compute_rates, mdlz_rate, static_rate
from .sweep import SweepGrid, SweepResult, fit_amplitude_condition, optimal_amplitude, peak_w12_frequency, run_sweep

__version__ = "0.1.0"

__all__ = [
    "Activation",
    "ComputeError",
    "DriveConfig",
    "FluxCoolError",
    "FluxQubitModel",
    "InputError",
    "Method",
    "RateSet",
    "SteadyState",
    "SweepGrid",
    "SweepResult",
    "Waveform",
    "airy_rate",
    "ang",
    "assemble_generator",
    "build_channels",
    "compute_rates",
    "effective_temperature",
    "equilibrium_p11",
    "fit_amplitude_condition",
    "mdlz_rate",
    "optimal_amplitude",
    "reference_model",
    "peak_w12_frequency",
    "run_sweep",
    "static_rate",
    "steady_state",
    "time_evolve",
    "to_ghz",
]
