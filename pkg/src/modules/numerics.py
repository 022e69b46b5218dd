"""
Module for the dense linear-algebra contract and the internal LP / QP solvers.

All matrices are dense numpy arrays. The LP solver is a two-phase tableau
simplex (Dantzig pricing with a switch to Bland's rule on degenerate stalls);
the QP solver is a primal active-set method.
"""

import logging
from dataclasses import dataclass, field
from typing import List, Optional, Tuple

import numpy as np
from scipy.linalg import expm

from src.constants.tolerances import TOLERANCES
from .errors import ConfigurationError, NumericalFailureError

logger = logging.getLogger(__name__)

OPTIMAL = 'optimal'
INFEASIBLE = 'infeasible'
UNBOUNDED = 'unbounded'

# Consecutive degenerate pivots tolerated before Bland's rule takes over
DEGENERATE_STALL = 25


def as_matrix(data, name: str = 'matrix', rows: Optional[int] = None,
              cols: Optional[int] = None) -> np.ndarray:
    """
    Convert data to a finite 2-D float array.

    Scalars become 1x1 matrices and 1-D inputs become a single row.
    """
    try:
        mat = np.array(data, dtype=float)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{name} is not numeric: {str(e)}")

    if mat.ndim == 0:
        mat = mat.reshape(1, 1)
    elif mat.ndim == 1:
        mat = mat.reshape(1, -1)
    elif mat.ndim != 2:
        raise ConfigurationError(f"{name} must be two-dimensional, got {mat.ndim} dimensions")

    if not np.all(np.isfinite(mat)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    if rows is not None and mat.shape[0] != rows:
        raise ConfigurationError(f"{name} must have {rows} rows, got {mat.shape[0]}")
    if cols is not None and mat.shape[1] != cols:
        raise ConfigurationError(f"{name} must have {cols} columns, got {mat.shape[1]}")
    return mat


def as_vector(data, name: str = 'vector', length: Optional[int] = None) -> np.ndarray:
    """Convert data to a finite 1-D float array."""
    try:
        vec = np.array(data, dtype=float).reshape(-1)
    except (TypeError, ValueError) as e:
        raise ConfigurationError(f"{name} is not numeric: {str(e)}")
    if not np.all(np.isfinite(vec)):
        raise ConfigurationError(f"{name} contains non-finite entries")
    if length is not None and vec.size != length:
        raise ConfigurationError(f"{name} must have length {length}, got {vec.size}")
    return vec


def spectral_radius(A: np.ndarray) -> float:
    """Largest eigenvalue magnitude (LAPACK Hessenberg/Schur QR iteration)."""
    if A.size == 0:
        return 0.0
    return float(np.max(np.abs(np.linalg.eigvals(A))))


def matrix_exponential(M, t: float = 1.0) -> np.ndarray:
    """Return exp(M*t) by Pade scaling and squaring."""
    mat = as_matrix(M, 'M')
    if mat.shape[0] != mat.shape[1]:
        raise ConfigurationError(f"Matrix exponential needs a square matrix, got shape {mat.shape}")
    return expm(mat * float(t))


@dataclass(frozen=True, eq=False)
class LpProblem:
    """maximize objective·z  s.t.  A z <= b,  lower <= z <= upper."""

    objective: np.ndarray
    A: np.ndarray
    b: np.ndarray
    lower: Optional[np.ndarray] = None
    upper: Optional[np.ndarray] = None

    def __post_init__(self):
        c = as_vector(self.objective, 'objective')
        n = c.size
        A = np.array(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, n)
        else:
            A = as_matrix(A, 'constraint matrix', cols=n)
        b = as_vector(self.b, 'rhs', length=A.shape[0])

        lower = np.full(n, -np.inf) if self.lower is None else np.array(self.lower, dtype=float).reshape(-1)
        upper = np.full(n, np.inf) if self.upper is None else np.array(self.upper, dtype=float).reshape(-1)
        if lower.size != n or upper.size != n:
            raise ConfigurationError("Variable bounds must match the objective length")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ConfigurationError("Variable bounds must not be NaN")

        object.__setattr__(self, 'objective', c)
        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'b', b)
        object.__setattr__(self, 'lower', lower)
        object.__setattr__(self, 'upper', upper)

    @property
    def n_vars(self) -> int:
        return self.objective.size


@dataclass(frozen=True, eq=False)
class LpOutcome:
    """Result of solve_lp."""

    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


@dataclass(frozen=True, eq=False)
class QpProblem:
    """minimize ½ zᵀQz + q·z  s.t.  G z <= h."""

    Q: np.ndarray
    q: np.ndarray
    G: np.ndarray
    h: np.ndarray

    def __post_init__(self):
        Q = as_matrix(self.Q, 'Q')
        n = Q.shape[0]
        if Q.shape[1] != n:
            raise ConfigurationError(f"Q must be square, got shape {Q.shape}")
        if np.max(np.abs(Q - Q.T), initial=0.0) > TOLERANCES.symmetry:
            raise ConfigurationError("Q must be symmetric")
        try:
            np.linalg.cholesky(Q)
        except np.linalg.LinAlgError:
            raise ConfigurationError("Q must be positive definite")

        q = as_vector(self.q, 'q', length=n)
        G = np.array(self.G, dtype=float)
        G = G.reshape(0, n) if G.size == 0 else as_matrix(G, 'G', cols=n)
        h = as_vector(self.h, 'h', length=G.shape[0])

        object.__setattr__(self, 'Q', Q)
        object.__setattr__(self, 'q', q)
        object.__setattr__(self, 'G', G)
        object.__setattr__(self, 'h', h)


@dataclass(frozen=True, eq=False)
class QpOutcome:
    """Result of solve_qp."""

    status: str
    x: Optional[np.ndarray] = None
    value: Optional[float] = None
    active: Tuple[int, ...] = field(default_factory=tuple)
    multipliers: Optional[np.ndarray] = None
    iterations: int = 0

    @property
    def is_optimal(self) -> bool:
        return self.status == OPTIMAL


def _pivot(T: np.ndarray, basis: np.ndarray, row: int, col: int):
    T[row] /= T[row, col]
    column = T[:, col].copy()
    column[row] = 0.0
    T -= np.outer(column, T[row])
    basis[row] = col


def _run_simplex(T: np.ndarray, basis: np.ndarray, cost: np.ndarray,
                 allowed: np.ndarray, max_iter: int) -> Tuple[str, int]:
    """Minimize cost over the tableau T (last column is the rhs)."""
    tol = TOLERANCES.pivot
    stall = 0
    use_bland = False

    for iteration in range(max_iter):
        reduced = cost - cost[basis] @ T[:, :-1]
        reduced[~allowed] = 0.0
        reduced[basis] = 0.0

        if use_bland:
            candidates = np.flatnonzero(reduced < -TOLERANCES.feasibility)
            if candidates.size == 0:
                return OPTIMAL, iteration
            col = int(candidates[0])
        else:
            col = int(np.argmin(reduced))
            if reduced[col] >= -TOLERANCES.feasibility:
                return OPTIMAL, iteration

        column = T[:, col]
        positive = column > tol
        if not np.any(positive):
            return UNBOUNDED, iteration

        rhs = np.maximum(T[:, -1], 0.0)
        ratios = np.full(T.shape[0], np.inf)
        ratios[positive] = rhs[positive] / column[positive]
        best = ratios.min()
        ties = np.flatnonzero(ratios <= best + tol * max(1.0, abs(best)))
        row = int(ties[np.argmin(basis[ties])])

        stall = stall + 1 if best <= tol else 0
        if stall > DEGENERATE_STALL and not use_bland:
            logger.debug("Degenerate stall detected, switching to Bland's rule")
            use_bland = True

        _pivot(T, basis, row, col)

    raise NumericalFailureError(
        f"Simplex exceeded its cycling guard of {max_iter} pivots")


def _solve_nonnegative(c: np.ndarray, A: np.ndarray, b: np.ndarray) -> Tuple[str, Optional[np.ndarray], int]:
    """maximize c·z  s.t.  A z <= b, z >= 0 (two-phase tableau simplex)."""
    m, n = A.shape
    if m == 0:
        if np.any(c > TOLERANCES.feasibility):
            return UNBOUNDED, None, 0
        return OPTIMAL, np.zeros(n), 0

    negative = b < 0
    n_art = int(negative.sum())
    width = n + m + n_art

    T = np.zeros((m, width + 1))
    T[:, :n] = A
    T[:, n:n + m] = np.eye(m)
    T[:, -1] = b
    T[negative] *= -1.0

    basis = np.empty(m, dtype=int)
    neg_rows = np.flatnonzero(negative)
    art_cols = n + m + np.arange(n_art)
    T[neg_rows, art_cols] = 1.0
    basis[~negative] = n + np.flatnonzero(~negative)
    basis[neg_rows] = art_cols

    max_iter = 50 * (m + width) + 100
    iterations = 0

    if n_art:
        cost = np.zeros(width)
        cost[art_cols] = 1.0
        status, used = _run_simplex(T, basis, cost, np.ones(width, dtype=bool), max_iter)
        iterations += used
        infeasibility = float(cost[basis] @ T[:, -1])
        if infeasibility > TOLERANCES.feasibility * (1.0 + np.max(np.abs(b))):
            return INFEASIBLE, None, iterations

        # Drive remaining artificials out of the basis
        for row in range(m):
            if basis[row] >= n + m:
                candidates = np.flatnonzero(np.abs(T[row, :n + m]) > TOLERANCES.pivot)
                if candidates.size:
                    _pivot(T, basis, row, int(candidates[0]))

    cost = np.zeros(width)
    cost[:n] = -c
    allowed = np.zeros(width, dtype=bool)
    allowed[:n + m] = True
    status, used = _run_simplex(T, basis, cost, allowed, max_iter)
    iterations += used
    if status == UNBOUNDED:
        return UNBOUNDED, None, iterations

    z = np.zeros(width)
    z[basis] = T[:, -1]
    return OPTIMAL, np.maximum(z[:n], 0.0), iterations


def solve_lp(problem: LpProblem) -> LpOutcome:
    """
    Solve an LP with the internal dense simplex.

    Bounded variables are shifted to be nonnegative, upper-only variables are
    reflected and free variables are split, so the tableau only ever sees
    z' >= 0.
    """
    c, A, b = problem.objective, problem.A, problem.b
    lower, upper = problem.lower, problem.upper
    n = c.size

    if np.any(lower > upper):
        return LpOutcome(status=INFEASIBLE)

    offset = np.zeros(n)
    columns: List[np.ndarray] = []
    bound_rows: List[Tuple[int, float]] = []
    for j in range(n):
        unit = np.zeros(n)
        unit[j] = 1.0
        if np.isfinite(lower[j]):
            offset[j] = lower[j]
            columns.append(unit)
            if np.isfinite(upper[j]):
                bound_rows.append((len(columns) - 1, upper[j] - lower[j]))
        elif np.isfinite(upper[j]):
            offset[j] = upper[j]
            columns.append(-unit)
        else:
            columns.append(unit)
            columns.append(-unit)

    T = np.column_stack(columns) if columns else np.zeros((n, 0))
    A_std = A @ T
    b_std = b - A @ offset
    if bound_rows:
        E = np.zeros((len(bound_rows), T.shape[1]))
        for k, (col, _) in enumerate(bound_rows):
            E[k, col] = 1.0
        A_std = np.vstack([A_std, E])
        b_std = np.concatenate([b_std, [span for _, span in bound_rows]])

    status, z_std, iterations = _solve_nonnegative(c @ T, A_std, b_std)
    if status != OPTIMAL:
        return LpOutcome(status=status, iterations=iterations)

    z = offset + T @ z_std
    return LpOutcome(status=OPTIMAL, x=z, value=float(c @ z), iterations=iterations)


def solve_qp(problem: QpProblem, max_iter: Optional[int] = None) -> QpOutcome:
    """
    Solve a strictly convex QP with a primal active-set method.

    The unconstrained minimizer is returned directly when it is feasible;
    otherwise the iteration starts from an LP-feasible point.
    """
    Q, q, G, h = problem.Q, problem.q, problem.G, problem.h
    n = q.size
    m = h.size
    tol = TOLERANCES.feasibility

    def objective(z):
        return float(0.5 * z @ Q @ z + q @ z)

    z = -np.linalg.solve(Q, q)
    if m == 0 or np.all(G @ z <= h + tol):
        active = tuple(int(i) for i in np.flatnonzero(np.abs(G @ z - h) <= tol)) if m else ()
        return QpOutcome(status=OPTIMAL, x=z, value=objective(z), active=active,
                         multipliers=np.zeros(len(active)))

    start = solve_lp(LpProblem(np.zeros(n), G, h))
    if not start.is_optimal:
        return QpOutcome(status=INFEASIBLE)
    z = start.x

    working: List[int] = []
    limit = max_iter or 20 * (n + m) + 50
    for iteration in range(limit):
        g = Q @ z + q
        if working:
            Gw = G[working]
            k = len(working)
            kkt = np.zeros((n + k, n + k))
            kkt[:n, :n] = Q
            kkt[:n, n:] = Gw.T
            kkt[n:, :n] = Gw
            solution = np.linalg.solve(kkt, np.concatenate([-g, np.zeros(k)]))
            p, lam = solution[:n], solution[n:]
        else:
            p = -np.linalg.solve(Q, g)
            lam = np.zeros(0)

        if np.linalg.norm(p) <= 1e-10 * (1.0 + np.linalg.norm(z)):
            if lam.size == 0 or lam.min() >= -1e-10 * (1.0 + np.abs(lam).max()):
                return QpOutcome(status=OPTIMAL, x=z, value=objective(z),
                                 active=tuple(working), multipliers=lam,
                                 iterations=iteration)
            working.pop(int(np.argmin(lam)))
            continue

        alpha = 1.0
        blocking = None
        Gp = G @ p
        slack = h - G @ z
        for i in range(m):
            if i in working or Gp[i] <= TOLERANCES.pivot:
                continue
            ratio = max(slack[i], 0.0) / Gp[i]
            if ratio < alpha:
                alpha = ratio
                blocking = i
        z = z + alpha * p
        if blocking is not None:
            working.append(blocking)

    raise NumericalFailureError(f"Active-set QP did not converge in {limit} iterations")
