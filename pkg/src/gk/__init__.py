"""Stochastic lattice dynamics with a bistable reaction term, their
discretized reaction-diffusion limit, and the interface motion both
approach: simulation, integration, wave profiles, envelope bounds and
the identities used to verify them."""

from .lattice import Configuration, ScalarField, TorusLattice
from .rates import REFERENCE_SPEC_1D as REFERENCE_SPEC_1D
from .rates import REFERENCE_SPEC_2D as REFERENCE_SPEC_2D
from .rates import RateSpec, validate

__all__ = [
    "Configuration",
    "ScalarField",
    "TorusLattice",
    "RateSpec",
    "REFERENCE_SPEC_1D",
    "REFERENCE_SPEC_2D",
    "validate",
]
