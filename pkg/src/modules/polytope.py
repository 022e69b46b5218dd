"""
Module for H-representation polytopes {z : Hz <= h}.

Redundancy elimination solves one LP per row against the remaining rows.
Disturbance sets additionally carry their vertex list so that Pontryagin
differences can be taken by maximizing over vertices.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np

from src.constants.tolerances import TOLERANCES
from .errors import ConfigurationError
from .numerics import INFEASIBLE, UNBOUNDED, LpProblem, as_matrix, as_vector, solve_lp

logger = logging.getLogger(__name__)

MAX_VERTEX_DIMENSION = 4


@dataclass(frozen=True, eq=False)
class Polytope:
    """Polytope {z : Hz <= h} with an optional vertex list."""

    H: np.ndarray
    h: np.ndarray
    vertices: Optional[np.ndarray] = None

    def __post_init__(self):
        H = np.array(self.H, dtype=float)
        if H.ndim != 2 or H.size:
            H = as_matrix(H, 'H')
        h = as_vector(self.h, 'h', length=H.shape[0])
        object.__setattr__(self, 'H', H)
        object.__setattr__(self, 'h', h)
        if self.vertices is not None:
            object.__setattr__(self, 'vertices', as_matrix(self.vertices, 'vertices', cols=H.shape[1]))

    @property
    def dimension(self) -> int:
        return self.H.shape[1]

    @property
    def n_rows(self) -> int:
        return self.H.shape[0]

    def contains(self, z, tol: float = TOLERANCES.membership) -> Tuple[bool, np.ndarray]:
        return contains(self, z, tol)

    @classmethod
    def box(cls, lower, upper) -> 'Polytope':
        """Axis-aligned box with its vertices."""
        lower = as_vector(lower, 'lower')
        upper = as_vector(upper, 'upper', length=lower.size)
        if np.any(lower > upper):
            raise ConfigurationError("Box lower bounds must not exceed upper bounds")
        d = lower.size
        H = np.vstack([np.eye(d), -np.eye(d)])
        h = np.concatenate([upper, -lower])
        corners = np.array(list(itertools.product(*zip(lower, upper))), dtype=float)
        corners = np.unique(corners, axis=0)
        return cls(H, h, corners)

    @classmethod
    def symmetric_box(cls, bounds) -> 'Polytope':
        bounds = as_vector(bounds, 'bounds')
        return cls.box(-bounds, bounds)

    def with_vertices(self) -> 'Polytope':
        if self.vertices is not None:
            return self
        return Polytope(self.H, self.h, enumerate_vertices(self))


def contains(P: Polytope, z, tol: float = TOLERANCES.membership) -> Tuple[bool, np.ndarray]:
    """Membership test; returns (inside, margin h - Hz)."""
    z = as_vector(z, 'z', length=P.dimension)
    margin = P.h - P.H @ z
    return bool(np.all(margin >= -tol)), margin


def support(P: Polytope, direction) -> Tuple[str, Optional[float], Optional[np.ndarray]]:
    """Support value max direction·z over P."""
    direction = as_vector(direction, 'direction', length=P.dimension)
    outcome = solve_lp(LpProblem(direction, P.H, P.h))
    return outcome.status, outcome.value, outcome.x


def is_empty(P: Polytope) -> bool:
    outcome = solve_lp(LpProblem(np.zeros(P.dimension), P.H, P.h))
    return outcome.status == INFEASIBLE


def is_implied(H: np.ndarray, h: np.ndarray, row: np.ndarray, rhs: float,
               tol: float = TOLERANCES.redundancy) -> bool:
    """True iff row·z <= rhs holds on {Hz <= h} (certified by LP)."""
    if not np.any(row):
        return rhs >= -tol
    outcome = solve_lp(LpProblem(row, H, h))
    if outcome.status == UNBOUNDED:
        return False
    if outcome.status == INFEASIBLE:
        # Empty relaxation: cannot certify
        return False
    return outcome.value <= rhs + tol


def redundant_row_mask(H: np.ndarray, h: np.ndarray,
                       tol: float = TOLERANCES.redundancy) -> np.ndarray:
    """Mark rows implied by the rows kept so far, scanning in index order."""
    rows = H.shape[0]
    keep = np.ones(rows, dtype=bool)
    for i in range(rows):
        keep[i] = False
        if not is_implied(H[keep], h[keep], H[i], h[i], tol):
            keep[i] = True
    return ~keep


def remove_redundant(P: Polytope, tol: float = TOLERANCES.redundancy) -> Polytope:
    """Drop every row implied by the others."""
    redundant = redundant_row_mask(P.H, P.h, tol)
    if redundant.any():
        logger.debug(f"Removed {int(redundant.sum())} of {P.n_rows} rows as redundant")
    return Polytope(P.H[~redundant], P.h[~redundant], P.vertices)


def pontryagin_diff(P: Polytope, map, W_vertices) -> Polytope:
    """P ∼ map·W: shrink each offset by its worst case over the W vertices."""
    vertices = np.array(W_vertices, dtype=float)
    if vertices.size == 0:
        raise ConfigurationError("Pontryagin difference needs a non-empty vertex list")
    vertices = as_matrix(vertices, 'W_vertices')
    map = as_matrix(map, 'map', rows=P.dimension, cols=vertices.shape[1])
    shifts = (P.H @ map @ vertices.T).max(axis=1)
    return Polytope(P.H, P.h - shifts)


def scale(P: Polytope, factor: float) -> Polytope:
    """Scale offsets by factor in (0, 1]; the set must contain the origin."""
    if not 0.0 < factor <= 1.0:
        raise ConfigurationError(f"Scale factor must lie in (0, 1], got {factor}")
    return Polytope(P.H, P.h * factor, None if P.vertices is None else P.vertices * factor)


def enumerate_vertices(P: Polytope, tol: float = TOLERANCES.feasibility) -> np.ndarray:
    """Brute-force vertex enumeration for low-dimensional polytopes."""
    d = P.dimension
    if d > MAX_VERTEX_DIMENSION:
        raise ConfigurationError(
            f"Vertex enumeration is limited to dimension {MAX_VERTEX_DIMENSION}, got {d}")

    found: List[np.ndarray] = []
    for combo in itertools.combinations(range(P.n_rows), d):
        sub = P.H[list(combo)]
        if abs(np.linalg.det(sub)) < 1e-12:
            continue
        point = np.linalg.solve(sub, P.h[list(combo)])
        if np.all(P.H @ point <= P.h + tol) and not any(np.allclose(point, v, atol=1e-9) for v in found):
            found.append(point)
    if not found:
        return np.zeros((0, d))
    return np.array(sorted(found, key=tuple))
