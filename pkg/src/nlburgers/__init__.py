"""Non-local Burgers equation ``u_t - u |d/dx| u + |d/dx|(u^2) = 0`` on the circle.

The package discretises the equation on a uniform periodic grid in several
equivalent forms, integrates it with explicit Runge-Kutta steps under a CFL
rule, and monitors the conservation and monotonicity laws of the flow.
"""
from .config import ConfigError, RunConfig
from .diagnostics import DecayFit, DiagnosticsRecord, RecordSettings, fit_decay, momentum_law_residual
from .dynamics import EquationForm, fem_assemble, fem_rhs, rhs
from .grid import Field, Grid, Spectrum, dft, extrema, idft, lp_norm, make_grid
from .integrators import Guards, Status, StepControl, Trajectory, cfl_timestep, evolve, step
from .kernels import PAPER, SPECTRAL, KernelMode, KernelSpec
from .operators import halflap_delta, halflap_spectral, pv_apply
from .presets import ScenarioPreset, preset, preset_names

__version__ = "0.1.0"

__all__ = [
    "ConfigError", "DecayFit", "DiagnosticsRecord", "EquationForm", "Field", "Grid",
    "Guards", "KernelMode", "KernelSpec", "PAPER", "RecordSettings", "RunConfig",
    "SPECTRAL", "ScenarioPreset", "Spectrum", "Status", "StepControl", "Trajectory",
    "cfl_timestep", "dft", "evolve", "extrema", "fem_assemble", "fem_rhs", "fit_decay",
    "halflap_delta", "halflap_spectral", "idft", "lp_norm", "make_grid",
    "momentum_law_residual", "preset", "preset_names", "pv_apply", "rhs", "step",
]
