"""Finite-volume lab for the degenerate chemotaxis-consumption system."""

from ._core import (
    Grid,
    HypothesisViolation,
    InvariantViolation,
    Motility,
    ScalarField,
    SolverFailure,
    ValidationError,
    advance,
    field_max,
    field_min,
    gradient_energy,
    integral,
    laplacian,
    lp_norm,
    motility_bounds,
    run,
    simulate,
    validate_config,
)

__all__ = [
    "Grid",
    "HypothesisViolation",
    "InvariantViolation",
    "Motility",
    "ScalarField",
    "SolverFailure",
    "ValidationError",
    "advance",
    "field_max",
    "field_min",
    "gradient_energy",
    "integral",
    "laplacian",
    "lp_norm",
    "motility_bounds",
    "run",
    "simulate",
    "validate_config",
]
