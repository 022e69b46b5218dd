"""
Numerical tolerances shared by every solver and set construction.
"""

from dataclasses import dataclass


@dataclass(frozen=True)
class Tolerances:
    """Single record of the tolerances used across the package."""

    feasibility: float = 1e-8
    redundancy: float = 1e-9
    symmetry: float = 1e-10
    pivot: float = 1e-12
    kappa_division: float = 1e-12
    limit: float = 1e-10
    cancellation: float = 1e-8
    root_cluster: float = 1e-5
    membership: float = 1e-9
    constraint_check: float = 1e-6


TOLERANCES = Tolerances()

# Iteration caps
DEFAULT_EPSILON = 0.01
DEFAULT_T_MAX = 500
DEFAULT_ITER_MAX = 200
LIMIT_POWER_CAP = 64
