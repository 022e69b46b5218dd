"""
Module for offline construction of maximal admissible sets.

Every variant is generated from an autonomous composite system
z+ = Phi z, y = Psi z over z = (x, v_N): output constraint rows are stacked
for prediction times t = 0, 1, ... until the rows of a new prediction time
are all implied by the stored ones (finite determination), and the
steady-state rows are tightened by (1 - epsilon).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.linalg import block_diag

from src.constants.tolerances import (DEFAULT_EPSILON, DEFAULT_ITER_MAX,
                                      DEFAULT_T_MAX, LIMIT_POWER_CAP,
                                      TOLERANCES)
from .errors import (ConfigurationError, InfeasibleRobustificationError,
                     NonTerminationError, NumericalFailureError)
from .numerics import LpProblem, OPTIMAL, as_matrix, as_vector, solve_lp, spectral_radius
from .polytope import Polytope, redundant_row_mask
from .sysmod import DisturbedModel, StateSpaceModel

logger = logging.getLogger(__name__)

STANDARD = 'standard'
LIFTED = 'lifted'
LAMBDA_LIFTED = 'lambda_lifted'
DISTURBANCE_PREVIEW = 'disturbance_preview'
ROBUST_STANDARD = 'robust_standard'
POLYTOPIC_ROBUST = 'polytopic_robust'

DELAY = 'delay'
LAMBDA = 'lambda'


@dataclass(frozen=True, eq=False)
class PreviewAMatrix:
    """Dynamics of the lifted command: v_N(t+1) = Ā v_N(t) when κ = 0."""

    matrix: np.ndarray
    horizons: Tuple[int, ...]
    kind: str = DELAY
    lambdas: Optional[Tuple[Tuple[float, ...], ...]] = None

    def __post_init__(self):
        M = as_matrix(self.matrix, 'Ā')
        horizons = tuple(int(N) for N in self.horizons)
        size = sum(N + 1 for N in horizons)
        if M.shape != (size, size):
            raise ConfigurationError(f"Ā must be {size}x{size} for horizons {horizons}, got {M.shape}")
        if np.any(np.abs(M.sum(axis=1) - 1.0) > 1e-12):
            raise ConfigurationError("Every row of Ā must sum to 1")
        object.__setattr__(self, 'matrix', M)
        object.__setattr__(self, 'horizons', horizons)

    @classmethod
    def delay(cls, N: int) -> 'PreviewAMatrix':
        """Shift the preview window and hold the last entry."""
        if N < 0:
            raise ConfigurationError(f"Horizon must be non-negative, got {N}")
        M = np.zeros((N + 1, N + 1))
        for i in range(N):
            M[i, i + 1] = 1.0
        M[N, N] = 1.0
        return cls(M, (N,), DELAY)

    @classmethod
    def lambda_shift(cls, lambdas: Sequence[float]) -> 'PreviewAMatrix':
        """
        Convex mixing of the stale preview with earlier entries.

        Row i (i < N) is [1-λ1, λ1-λ2, ..., λi-1 - λi, λi, 0, ...]; the last
        row repeats row N-1. All ones gives the delay matrix, all zeros
        collapses every row onto the first entry.
        """
        lam = as_vector(lambdas, 'lambdas')
        if np.any(lam < 0.0) or np.any(lam > 1.0):
            raise ConfigurationError(f"λ values must lie in [0, 1], got {lam.tolist()}")
        N = lam.size
        if N == 0:
            return cls(np.ones((1, 1)), (0,), LAMBDA, ((),))
        M = np.zeros((N + 1, N + 1))
        for i in range(N):
            M[i, 0] = 1.0 - lam[0]
            for k in range(1, i + 1):
                M[i, k] = lam[k - 1] - lam[k]
            M[i, i + 1] = lam[i]
        M[N] = M[N - 1]
        return cls(M, (N,), LAMBDA, (tuple(lam.tolist()),))

    @classmethod
    def from_matrix(cls, matrix) -> 'PreviewAMatrix':
        """Row-stochastic mixing matrix given entry by entry."""
        M = as_matrix(matrix, 'Ā')
        return cls(M, (M.shape[0] - 1,), LAMBDA)

    @classmethod
    def block_diagonal(cls, parts: Sequence['PreviewAMatrix']) -> 'PreviewAMatrix':
        if not parts:
            raise ConfigurationError("Need at least one channel")
        horizons = tuple(N for part in parts for N in part.horizons)
        kind = DELAY if all(part.kind == DELAY for part in parts) else LAMBDA
        return cls(block_diag(*[part.matrix for part in parts]), horizons, kind)

    @property
    def size(self) -> int:
        return self.matrix.shape[0]

    @property
    def horizon(self) -> int:
        return max(self.horizons)

    @property
    def offsets(self) -> Tuple[int, ...]:
        """Index of each channel's current entry inside v_N."""
        starts = np.cumsum([0] + [N + 1 for N in self.horizons[:-1]])
        return tuple(int(s) for s in starts)

    def limit(self) -> np.ndarray:
        """lim Āᵗ by repeated squaring."""
        power = self.matrix
        for _ in range(LIMIT_POWER_CAP):
            squared = power @ power
            if np.max(np.abs(squared - power)) <= TOLERANCES.limit:
                return squared
            power = squared
        raise NumericalFailureError("Āᵗ did not converge; the preview A-matrix has no limit")

    def to_document(self) -> Dict:
        return {
            'matrix': self.matrix.tolist(),
            'horizons': list(self.horizons),
            'kind': self.kind,
            'lambdas': None if self.lambdas is None else [list(l) for l in self.lambdas],
        }

    @classmethod
    def from_document(cls, doc: Dict) -> 'PreviewAMatrix':
        lambdas = doc.get('lambdas')
        return cls(np.array(doc['matrix'], dtype=float), tuple(doc['horizons']), doc.get('kind', DELAY),
                   None if lambdas is None else tuple(tuple(l) for l in lambdas))


@dataclass(frozen=True, eq=False)
class AdmissibleSet:
    """
    Finitely determined admissible set H_x x + H_v v (+ H_w w) <= h.

    t_star certifies that the rows of prediction time t_star + 1 are implied
    by the stored rows.
    """

    H_x: np.ndarray
    H_v: np.ndarray
    h: np.ndarray
    horizon: int
    t_star: int
    epsilon: float
    variant: str
    H_w: Optional[np.ndarray] = None
    horizons: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        rows = self.h.shape[0]
        if self.H_x.shape[0] != rows or self.H_v.shape[0] != rows:
            raise ConfigurationError("H_x, H_v and h must have the same number of rows")
        if self.H_w is not None and self.H_w.shape[0] != rows:
            raise ConfigurationError("H_w must have as many rows as h")

    @property
    def n_rows(self) -> int:
        return self.h.shape[0]

    @property
    def n_states(self) -> int:
        return self.H_x.shape[1]

    @property
    def n_commands(self) -> int:
        return self.H_v.shape[1]

    def margin(self, x, v, w=None) -> np.ndarray:
        value = self.H_x @ np.asarray(x, dtype=float).reshape(-1) + self.H_v @ np.asarray(v, dtype=float).reshape(-1)
        if self.H_w is not None:
            w = np.zeros(self.H_w.shape[1]) if w is None else np.asarray(w, dtype=float).reshape(-1)
            value = value + self.H_w @ w
        return self.h - value

    def contains(self, x, v, w=None, tol: float = TOLERANCES.membership) -> bool:
        return bool(np.all(self.margin(x, v, w) >= -tol))

    def as_polytope(self) -> Polytope:
        blocks = [self.H_x, self.H_v] + ([self.H_w] if self.H_w is not None else [])
        return Polytope(np.hstack(blocks), self.h)

    def to_document(self) -> Dict:
        return {
            'variant': self.variant,
            'horizon': self.horizon,
            'horizons': list(self.horizons),
            't_star': self.t_star,
            'epsilon': self.epsilon,
            'H_x': self.H_x.tolist(),
            'H_v': self.H_v.tolist(),
            'H_w': None if self.H_w is None else self.H_w.tolist(),
            'h': self.h.tolist(),
        }

    @classmethod
    def from_document(cls, doc: Dict) -> 'AdmissibleSet':
        rows = len(doc['h'])

        def block(key):
            data = np.array(doc[key], dtype=float)
            return data.reshape(rows, -1)

        return cls(
            H_x=block('H_x'),
            H_v=block('H_v'),
            h=np.array(doc['h'], dtype=float),
            horizon=int(doc['horizon']),
            t_star=int(doc['t_star']),
            epsilon=float(doc['epsilon']),
            variant=doc['variant'],
            H_w=None if doc.get('H_w') is None else block('H_w'),
            horizons=tuple(doc.get('horizons') or ()),
        )


def steady_state_gain(A: np.ndarray, B: np.ndarray, C: np.ndarray, D: np.ndarray) -> np.ndarray:
    """C (I - A)^-1 B + D."""
    return C @ np.linalg.solve(np.eye(A.shape[0]) - A, B) + D


def _check_epsilon(epsilon: float):
    if not 0.0 < epsilon < 1.0:
        raise ConfigurationError(f"epsilon must lie in (0, 1), got {epsilon}")


def _row_excess(G: np.ndarray, g: np.ndarray, row: np.ndarray, rhs: float) -> float:
    """max row·z - rhs over {Gz <= g}; +inf when it cannot be certified."""
    if not np.any(row):
        return -rhs
    outcome = solve_lp(LpProblem(row, G, g))
    if outcome.status != OPTIMAL:
        return np.inf
    return outcome.value - rhs


def _prune(G: np.ndarray, g: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    redundant = redundant_row_mask(G, g)
    return G[~redundant], g[~redundant]


def _determine(base_G: np.ndarray, base_g: np.ndarray,
               generator: Callable[[int], Tuple[np.ndarray, np.ndarray]],
               t_max: int, label: str, min_generation: int = 0) -> Tuple[np.ndarray, np.ndarray, int]:
    """
    Stack generator(t) rows for t = 0, 1, ... until every row of some
    t >= min_generation is implied by the stored rows; returns the pruned
    rows and t*.

    Rows of t that are already implied when generated are not stored.
    Generations below min_generation are still time varying (previewed
    disturbances are being injected), so they cannot end the iteration.
    """
    G, g = base_G, base_g
    worst = np.inf
    for t in range(t_max + 1):
        rows, rhs = generator(t)
        fresh = []
        worst = -np.inf
        for i in range(rows.shape[0]):
            excess = _row_excess(G, g, rows[i], rhs[i])
            worst = max(worst, excess)
            if excess > TOLERANCES.redundancy:
                fresh.append(i)
        if not fresh and t >= min_generation:
            G, g = _prune(G, g)
            return G, g, max(t - 1, 0)
        if fresh:
            G = np.vstack([G, rows[fresh]])
            g = np.concatenate([g, rhs[fresh]])

    raise NonTerminationError(
        f"{label}: no finite determination within t_max={t_max} (last margin {worst:.3g})",
        last_margin=float(worst), iterations=t_max)


def _assert_stable(A: np.ndarray, context: str):
    rho = spectral_radius(A)
    if rho >= 1.0:
        raise ConfigurationError(f"{context} is unstable: eigenvalue magnitude {rho:.6g} >= 1")


def _lifted_generator(A, B, C, D, a_bar: np.ndarray, S: np.ndarray, s: np.ndarray):
    """Rows S·Psi·Phiᵗ of the composite (x, v_N) system, t = 0, 1, ..."""
    n, L = B.shape
    Phi = np.block([[A, B], [np.zeros((L, n)), a_bar]])
    Psi = np.hstack([C, D])
    state = {'t': 0, 'power': Psi}

    def generator(t: int):
        while state['t'] < t:
            state['power'] = state['power'] @ Phi
            state['t'] += 1
        return S @ state['power'], s.copy()

    return generator


def _build_lifted(model: StateSpaceModel, a_bar: PreviewAMatrix, Y: Polytope,
                  epsilon: float, t_max: int, variant: str) -> AdmissibleSet:
    if not model.is_discrete:
        raise ConfigurationError("Admissible sets need a discrete-time model")
    model.assert_stable('Model')
    _check_epsilon(epsilon)
    if model.n_inputs != a_bar.size:
        raise ConfigurationError(
            f"Lifted input width {model.n_inputs} does not match Ā size {a_bar.size}")
    if Y.dimension != model.n_outputs:
        raise ConfigurationError(
            f"Constraint set dimension {Y.dimension} does not match {model.n_outputs} outputs")

    n = model.n_states
    S, s = Y.H, Y.h
    gain = steady_state_gain(model.A, model.B, model.C, model.D) @ a_bar.limit()
    ss_rows = np.hstack([np.zeros((S.shape[0], n)), S @ gain])
    ss_rhs = (1.0 - epsilon) * s

    generator = _lifted_generator(model.A, model.B, model.C, model.D, a_bar.matrix, S, s)
    G, g, t_star = _determine(ss_rows, ss_rhs, generator, t_max, f"{variant} set")

    result = AdmissibleSet(G[:, :n], G[:, n:], g, a_bar.horizon, t_star, epsilon, variant,
                           horizons=a_bar.horizons)
    logger.info(f"Built {variant} admissible set: N={a_bar.horizon}, t*={t_star}, rows={result.n_rows}")
    return result


def build_mas(model: StateSpaceModel, Y: Polytope, epsilon: float = DEFAULT_EPSILON,
              t_max: int = DEFAULT_T_MAX) -> AdmissibleSet:
    """Maximal admissible set for constant commands."""
    a_bar = PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(0)] * model.n_inputs)
    return _build_lifted(model, a_bar, Y, epsilon, t_max, STANDARD)


def build_lifted_mas(model: StateSpaceModel, a_bar: PreviewAMatrix, Y: Polytope,
                     epsilon: float = DEFAULT_EPSILON,
                     t_max: int = DEFAULT_T_MAX) -> AdmissibleSet:
    """Admissible set over (x, v_N) for an already lifted model."""
    variant = LIFTED if a_bar.kind == DELAY else LAMBDA_LIFTED
    return _build_lifted(model, a_bar, Y, epsilon, t_max, variant)


def _disturbance_offsets(model: DisturbedModel, S: np.ndarray, s: np.ndarray,
                         n_preview: int, t_limit: int):
    """
    Offsets of the tightened output sets.

    With N = n_preview - 1: s_t = s for t <= N, s_{N+1} = s - δ(D_w) and
    s_{t+1} = s_t - δ(C A^(t-N-1) B_w), where δ(M) = max over W vertices of S·M·w.
    """
    A, C = model.base.A, model.base.C
    vertices = model.disturbance_set.vertices

    def worst(M):
        return (S @ M @ vertices.T).max(axis=1)

    offsets = []
    current = s.copy()
    A_power = np.eye(A.shape[0])
    for t in range(t_limit + 1):
        if t == n_preview:
            current = current - worst(model.D_w)
        elif t > n_preview:
            current = current - worst(C @ A_power @ model.B_w)
            A_power = A_power @ A
        offsets.append(current.copy())
    return offsets


def _disturbance_limit(model: DisturbedModel, S: np.ndarray, s: np.ndarray, t_max: int) -> np.ndarray:
    """Offsets of the limit set Y ∼ D_w W ∼ C B_w W ∼ C A B_w W ∼ ..."""
    A, C = model.base.A, model.base.C
    vertices = model.disturbance_set.vertices
    limit = s - (S @ model.D_w @ vertices.T).max(axis=1)
    A_power = np.eye(A.shape[0])
    for _ in range(10 * t_max):
        term = (S @ C @ A_power @ model.B_w @ vertices.T).max(axis=1)
        limit = limit - term
        if np.max(np.abs(term)) < 1e-14 * (1.0 + np.max(np.abs(s))):
            break
        A_power = A_power @ A
    return limit


def _build_disturbance(model: DisturbedModel, n_preview: int, Y: Polytope,
                       epsilon: float, t_max: int, variant: str) -> AdmissibleSet:
    base = model.base
    if not base.is_discrete:
        raise ConfigurationError("Admissible sets need a discrete-time model")
    base.assert_stable('Model')
    _check_epsilon(epsilon)

    A, B, C, D = base.A, base.B, base.C, base.D
    n, m = base.n_states, base.n_inputs
    n_w = model.n_disturbances
    S, s = Y.H, Y.h
    width_w = n_preview * n_w

    limit = _disturbance_limit(model, S, s, t_max)
    if np.any(limit <= 0.0):
        raise InfeasibleRobustificationError(
            "Disturbance tightening empties the output constraint set "
            f"(limit offsets {np.round(limit, 6).tolist()})")

    offsets = _disturbance_offsets(model, S, s, n_preview, t_max)

    # Steady-state rows and the membership rows of every previewed sample
    gain = steady_state_gain(A, B, C, D)
    base_rows = [np.hstack([np.zeros((S.shape[0], n)), S @ gain, np.zeros((S.shape[0], width_w))])]
    base_rhs = [(1.0 - epsilon) * limit]
    H_W, h_W = model.disturbance_set.H, model.disturbance_set.h
    for k in range(n_preview):
        rows = np.zeros((H_W.shape[0], n + m + width_w))
        rows[:, n + m + k * n_w:n + m + (k + 1) * n_w] = H_W
        base_rows.append(rows)
        base_rhs.append(h_W)

    # Responses at prediction time t to x0, v0 and the previewed w_k
    state = {'t': 0, 'X_x': np.eye(n), 'X_v': np.zeros((n, m)), 'X_w': np.zeros((n, width_w))}

    def generator(t: int):
        while state['t'] < t:
            k = state['t']
            injection = np.zeros((n, width_w))
            if k < n_preview:
                injection[:, k * n_w:(k + 1) * n_w] = model.B_w
            state['X_x'] = A @ state['X_x']
            state['X_v'] = A @ state['X_v'] + B
            state['X_w'] = A @ state['X_w'] + injection
            state['t'] += 1
        direct_w = np.zeros((C.shape[0], width_w))
        if t < n_preview:
            direct_w[:, t * n_w:(t + 1) * n_w] = model.D_w
        rows = np.hstack([C @ state['X_x'], C @ state['X_v'] + D, C @ state['X_w'] + direct_w])
        return S @ rows, offsets[min(t, len(offsets) - 1)]

    G, g, t_star = _determine(np.vstack(base_rows), np.concatenate(base_rhs), generator, t_max,
                              f"{variant} set", min_generation=n_preview + 1)
    result = AdmissibleSet(G[:, :n], G[:, n:n + m], g, max(n_preview - 1, 0), t_star, epsilon,
                           variant, H_w=G[:, n + m:], horizons=(max(n_preview - 1, 0),))
    logger.info(f"Built {variant} admissible set: previewed samples={n_preview}, "
                f"t*={t_star}, rows={result.n_rows}")
    return result


def build_disturbance_preview_mas(model: DisturbedModel, N: int, Y: Polytope,
                                  epsilon: float = DEFAULT_EPSILON,
                                  t_max: int = DEFAULT_T_MAX) -> AdmissibleSet:
    """Robust set over (x0, v0, w0..wN) with the disturbances w0..wN previewed."""
    if N < 0:
        raise ConfigurationError(f"Preview horizon must be non-negative, got {N}")
    return _build_disturbance(model, N + 1, Y, epsilon, t_max, DISTURBANCE_PREVIEW)


def build_robust_mas(model: DisturbedModel, Y: Polytope, epsilon: float = DEFAULT_EPSILON,
                     t_max: int = DEFAULT_T_MAX) -> AdmissibleSet:
    """Robust set over (x0, v0) with every disturbance treated as worst case."""
    return _build_disturbance(model, 0, Y, epsilon, t_max, ROBUST_STANDARD)


def build_polytopic_robust_mas(vertex_models: Sequence[Tuple[np.ndarray, np.ndarray]],
                               C, D, Y: Polytope, epsilon: float = DEFAULT_EPSILON,
                               iter_max: int = DEFAULT_ITER_MAX,
                               a_bar: Optional[PreviewAMatrix] = None) -> AdmissibleSet:
    """
    Robust set for (A, B) ranging over the convex hull of vertex_models.

    Fixed-point sweep: every stored dynamic row is pre-composed with each
    vertex dynamics until no new row survives the redundancy test.
    """
    if not vertex_models:
        raise ConfigurationError("Need at least one vertex model")
    _check_epsilon(epsilon)
    C = as_matrix(C, 'C')
    n = C.shape[1]
    models = []
    for l, (A_l, B_l) in enumerate(vertex_models):
        A_l = as_matrix(A_l, f'A[{l}]', rows=n, cols=n)
        B_l = as_matrix(B_l, f'B[{l}]', rows=n)
        _assert_stable(A_l, f"Vertex model {l}")
        models.append((A_l, B_l))
    L = models[0][1].shape[1]
    if any(B_l.shape[1] != L for _, B_l in models):
        raise ConfigurationError("All vertex input matrices must have the same width")
    D = as_matrix(D, 'D', rows=C.shape[0], cols=L)
    if a_bar is None:
        a_bar = PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(0)] * L)
    if a_bar.size != L:
        raise ConfigurationError(f"Ā size {a_bar.size} does not match input width {L}")

    S, s = Y.H, Y.h
    a_limit = a_bar.limit()
    steady = [np.hstack([np.zeros((S.shape[0], n)), S @ steady_state_gain(A_l, B_l, C, D) @ a_limit])
              for A_l, B_l in models]
    G = np.vstack(steady)
    g = np.concatenate([(1.0 - epsilon) * s] * len(models))
    G, g = _prune(G, g)

    Phis = [np.block([[A_l, B_l], [np.zeros((L, n)), a_bar.matrix]]) for A_l, B_l in models]
    static = S @ np.hstack([C, D])

    frontier = []
    for i in range(static.shape[0]):
        if _row_excess(G, g, static[i], s[i]) > TOLERANCES.redundancy:
            G = np.vstack([G, static[i]])
            g = np.append(g, s[i])
            frontier.append((static[i], s[i]))

    sweeps = 0
    while frontier:
        if sweeps >= iter_max:
            raise NonTerminationError(
                f"Polytopic robust set: no fixed point within {iter_max} sweeps",
                iterations=iter_max)
        sweeps += 1
        next_frontier = []
        for row, rhs in frontier:
            for Phi in Phis:
                candidate = row @ Phi
                if _row_excess(G, g, candidate, rhs) > TOLERANCES.redundancy:
                    G = np.vstack([G, candidate])
                    g = np.append(g, rhs)
                    next_frontier.append((candidate, rhs))
        frontier = next_frontier

    G, g = _prune(G, g)
    result = AdmissibleSet(G[:, :n], G[:, n:], g, a_bar.horizon, max(sweeps - 1, 0), epsilon,
                           POLYTOPIC_ROBUST, horizons=a_bar.horizons)
    logger.info(f"Built {POLYTOPIC_ROBUST} admissible set: vertices={len(models)}, "
                f"sweeps={sweeps}, rows={result.n_rows}")
    return result


def pad_lifted_point(v_Ni, N_i: int, N_q: int) -> np.ndarray:
    """Append N_q - N_i copies of the last entry."""
    v = as_vector(v_Ni, 'v_N', length=N_i + 1)
    if N_i > N_q:
        raise ConfigurationError(f"Cannot pad horizon {N_i} down to {N_q}")
    return np.concatenate([v, np.full(N_q - N_i, v[-1])])


def slice_support(aset: AdmissibleSet, x, direction,
                  fixed: Optional[Dict[int, float]] = None) -> Optional[float]:
    """
    Support value of the command slice {v : (x, v) in the set} along direction;
    entries listed in fixed are pinned, the rest are free.
    """
    x = as_vector(x, 'x', length=aset.n_states)
    direction = as_vector(direction, 'direction', length=aset.n_commands)
    lower = np.full(aset.n_commands, -np.inf)
    upper = np.full(aset.n_commands, np.inf)
    for index, value in (fixed or {}).items():
        lower[index] = upper[index] = value
    outcome = solve_lp(LpProblem(direction, aset.H_v, aset.h - aset.H_x @ x, lower, upper))
    return outcome.value if outcome.is_optimal else None


def slice_boundary(aset: AdmissibleSet, x, axes: Tuple[int, int] = (0, 1),
                   n_directions: int = 64,
                   fixed: Optional[Dict[int, float]] = None) -> np.ndarray:
    """Boundary points of a two-coordinate command slice, ordered by angle."""
    x = as_vector(x, 'x', length=aset.n_states)
    lower = np.full(aset.n_commands, -np.inf)
    upper = np.full(aset.n_commands, np.inf)
    for index, value in (fixed or {}).items():
        lower[index] = upper[index] = value

    points = []
    for angle in np.linspace(0.0, 2.0 * np.pi, n_directions, endpoint=False):
        direction = np.zeros(aset.n_commands)
        direction[axes[0]] = np.cos(angle)
        direction[axes[1]] = np.sin(angle)
        outcome = solve_lp(LpProblem(direction, aset.H_v, aset.h - aset.H_x @ x, lower, upper))
        if outcome.is_optimal:
            points.append(outcome.x[list(axes)])
    return np.array(points).reshape(-1, 2)
