"""Simulation and analysis of a Hassell-Varley predator-prey model with a
generalist predator and optional indirect control."""

from .control import ControlledStabilityReport, classify_controlled, controlled_equilibrium
from .equilibrium import (
    BoundsReport,
    GlobalStabilityReport,
    StabilityReport,
    characteristic_coefficients,
    check_boundedness,
    check_global_stability,
    classify_local,
    hopf_point,
    interior_equilibrium,
    lyapunov_value,
)
from .integrator import IntegratorConfig, Trajectory, integrate, sample_uniform
from .model import (
    ControlParams,
    DimensionalParams,
    ExtendedState,
    Params,
    State,
    check_admissible,
    extended_jacobian,
    extended_vector_field,
    jacobian,
    nondimensionalize,
    vector_field,
)

__version__ = "0.1.0"
