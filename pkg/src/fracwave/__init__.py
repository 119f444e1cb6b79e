"""Transmission wave problem with exponentially weighted Caputo damping."""

from .analysis import DecayFit, EnergySeries, fit_decay, identity_residual
from .assembly import apply_operator, assemble, assemble_mass, assemble_stiffness
from .errors import (
    FracwaveError,
    InvalidParameter,
    NonFiniteState,
    ShapeMismatch,
    SolveFailure,
    ValidationError,
)
from .model import PRESETS, SimConfig, load_config, parse_config, preset, validate
from .stepper import SimState, run, step

__all__ = [
    "DecayFit",
    "EnergySeries",
    "FracwaveError",
    "InvalidParameter",
    "NonFiniteState",
    "PRESETS",
    "ShapeMismatch",
    "SimConfig",
    "SimState",
    "SolveFailure",
    "ValidationError",
    "apply_operator",
    "assemble",
    "assemble_mass",
    "assemble_stiffness",
    "fit_decay",
    "identity_residual",
    "load_config",
    "parse_config",
    "preset",
    "run",
    "step",
    "validate",
]

__version__ = "0.1.0"
