"""Exact solution of the Kramers slip problem for the Holway-Shakhov model."""
from .dispersion import BranchCutGeometry, ModelParameters
from .errors import KramersError
from .oracle import OrdinateGrid, cross_validate, solve_halfspace
from .rhfactor import FactorSolution, factorize
from .slip import (
    FieldProfile,
    KramersProblem,
    KramersSolution,
    SlipResult,
    normalized_zeta,
    slip_velocity,
)

__all__ = [
    "BranchCutGeometry",
    "FactorSolution",
    "FieldProfile",
    "KramersError",
    "KramersProblem",
    "KramersSolution",
    "ModelParameters",
    "OrdinateGrid",
    "SlipResult",
    "cross_validate",
    "factorize",
    "normalized_zeta",
    "slip_velocity",
    "solve_halfspace",
]
