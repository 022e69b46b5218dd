"""
Module for LTI system models: ZOH discretization, state-feedback loop closure,
input lifting, transfer functions and the decoupling filters used by the
decoupled governor.
"""

import dataclasses
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import signal
from scipy.linalg import block_diag

from src.constants.tolerances import TOLERANCES
from .errors import ConfigurationError, NumericalFailureError
from .numerics import as_matrix, as_vector, matrix_exponential, spectral_radius
from .polytope import Polytope

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class StateSpaceModel:
    """LTI model x+ = Ax + Bu, y = Cx + Du (continuous when sample_time is None)."""

    A: np.ndarray
    B: np.ndarray
    C: np.ndarray
    D: np.ndarray
    sample_time: Optional[float] = None

    def __post_init__(self):
        A = np.array(self.A, dtype=float)
        if A.size == 0:
            A = A.reshape(0, 0)
        else:
            A = as_matrix(A, 'A')
        n = A.shape[0]
        if A.shape[1] != n:
            raise ConfigurationError(f"A must be square, got shape {A.shape}")

        B = np.array(self.B, dtype=float)
        if B.size == 0:
            B = B if B.ndim == 2 and B.shape[0] == n else B.reshape(n, 0)
        else:
            B = as_matrix(B, 'B', rows=n)
        C = np.array(self.C, dtype=float)
        if C.size == 0:
            C = C if C.ndim == 2 and C.shape[1] == n else C.reshape(0, n)
        else:
            C = as_matrix(C, 'C', cols=n)
        D = as_matrix(self.D, 'D', rows=C.shape[0], cols=B.shape[1])

        if self.sample_time is not None and not self.sample_time > 0:
            raise ConfigurationError(f"Sample time must be positive, got {self.sample_time}")

        object.__setattr__(self, 'A', A)
        object.__setattr__(self, 'B', B)
        object.__setattr__(self, 'C', C)
        object.__setattr__(self, 'D', D)

    @property
    def n_states(self) -> int:
        return self.A.shape[0]

    @property
    def n_inputs(self) -> int:
        return self.B.shape[1]

    @property
    def n_outputs(self) -> int:
        return self.C.shape[0]

    @property
    def is_discrete(self) -> bool:
        return self.sample_time is not None

    def stability_margin(self) -> float:
        """Spectral radius (discrete) or largest real part (continuous)."""
        if self.n_states == 0:
            return 0.0 if self.is_discrete else -np.inf
        if self.is_discrete:
            return spectral_radius(self.A)
        return float(np.max(np.linalg.eigvals(self.A).real))

    def is_stable(self) -> bool:
        margin = self.stability_margin()
        return margin < 1.0 if self.is_discrete else margin < 0.0

    def assert_stable(self, context: str = 'Model'):
        """Raise ConfigurationError naming the offending eigenvalue."""
        if not self.is_stable():
            margin = self.stability_margin()
            if self.is_discrete:
                raise ConfigurationError(
                    f"{context} is unstable: eigenvalue magnitude {margin:.6g} >= 1")
            raise ConfigurationError(
                f"{context} is unstable: eigenvalue real part {margin:.6g} >= 0")

    def dc_gain(self) -> np.ndarray:
        """Steady-state gain from constant input to output."""
        if self.n_states == 0:
            return self.D.copy()
        if self.is_discrete:
            return self.C @ np.linalg.solve(np.eye(self.n_states) - self.A, self.B) + self.D
        return -self.C @ np.linalg.solve(self.A, self.B) + self.D

    def frequency_response(self, z: complex) -> np.ndarray:
        """Evaluate C(zI - A)^-1 B + D at the complex point z."""
        if self.n_states == 0:
            return self.D.astype(complex)
        resolvent = np.linalg.solve(z * np.eye(self.n_states) - self.A, self.B)
        return self.C @ resolvent + self.D

    def replace(self, **changes) -> 'StateSpaceModel':
        return dataclasses.replace(self, **changes)


@dataclass(frozen=True, eq=False)
class DisturbedModel:
    """StateSpaceModel with an additive bounded disturbance w in a polytope."""

    base: StateSpaceModel
    B_w: np.ndarray
    D_w: np.ndarray
    disturbance_set: Polytope

    def __post_init__(self):
        W = self.disturbance_set
        if W.vertices is None or len(W.vertices) == 0:
            raise ConfigurationError("Disturbance set must carry its vertex list")
        n_w = W.dimension
        B_w = as_matrix(self.B_w, 'B_w', rows=self.base.n_states, cols=n_w)
        D_w = as_matrix(self.D_w, 'D_w', rows=self.base.n_outputs, cols=n_w)
        inside, _ = W.contains(np.zeros(n_w))
        if not inside:
            raise ConfigurationError("Disturbance set must contain the origin")
        object.__setattr__(self, 'B_w', B_w)
        object.__setattr__(self, 'D_w', D_w)

    @property
    def n_disturbances(self) -> int:
        return self.B_w.shape[1]


def step(model, x, u, w=None) -> Tuple[np.ndarray, np.ndarray]:
    """
    One step of the model: returns (x_next, y).

    For a DisturbedModel, w is the disturbance acting at this step.
    """
    base = model.base if isinstance(model, DisturbedModel) else model
    x = as_vector(x, 'x', length=base.n_states)
    u = as_vector(u, 'u', length=base.n_inputs)
    x_next = base.A @ x + base.B @ u
    y = base.C @ x + base.D @ u
    if isinstance(model, DisturbedModel):
        w = np.zeros(model.n_disturbances) if w is None else as_vector(w, 'w', length=model.n_disturbances)
        x_next = x_next + model.B_w @ w
        y = y + model.D_w @ w
    elif w is not None:
        raise ConfigurationError("Disturbance given for a model without disturbance input")
    return x_next, y


def discretize_zoh(continuous: StateSpaceModel, Ts: float) -> StateSpaceModel:
    """Zero-order-hold discretization via the augmented matrix exponential."""
    if continuous.is_discrete:
        raise ConfigurationError("Model is already discrete")
    if not Ts > 0:
        raise ConfigurationError(f"Sample time must be positive, got {Ts}")

    n, m = continuous.n_states, continuous.n_inputs
    # M = [A  B]    expm(M Ts) = [A_d  B_d]
    #     [0  0]                 [ 0    I ]
    M = np.block([[continuous.A, continuous.B],
                  [np.zeros((m, n)), np.zeros((m, m))]])
    E = matrix_exponential(M, Ts)

    A_d, B_d = E[:n, :n], E[:n, n:]
    identity_block = np.hstack([np.zeros((m, n)), np.eye(m)])
    if (not np.all(np.isfinite(E))
            or not np.allclose(E[n:, :], identity_block, atol=1e-9)
            or (n and abs(np.linalg.det(A_d)) < np.finfo(float).tiny)):
        raise NumericalFailureError(f"Augmented exponential is singular or inaccurate at Ts={Ts}")

    return StateSpaceModel(A_d, B_d, continuous.C, continuous.D, sample_time=float(Ts))


def close_state_feedback(plant: StateSpaceModel, K, precomp) -> StateSpaceModel:
    """Close u = precomp·v − K·x around the plant."""
    K = as_matrix(K, 'K', rows=plant.n_inputs, cols=plant.n_states)
    P = as_matrix(precomp, 'precomp', rows=plant.n_inputs, cols=plant.n_inputs)
    closed = StateSpaceModel(
        plant.A - plant.B @ K,
        plant.B @ P,
        plant.C - plant.D @ K,
        plant.D @ P,
        sample_time=plant.sample_time,
    )
    closed.assert_stable('Closed loop')
    return closed


def lift_input_multi(model: StateSpaceModel, horizons: Sequence[int]) -> StateSpaceModel:
    """Expand each input column j into [B_j 0 ... 0] of width N_j+1."""
    horizons = [int(N) for N in horizons]
    if len(horizons) != model.n_inputs:
        raise ConfigurationError(
            f"Need one horizon per input ({model.n_inputs}), got {len(horizons)}")
    if any(N < 0 for N in horizons):
        raise ConfigurationError(f"Horizons must be non-negative, got {horizons}")

    B_blocks, D_blocks = [], []
    for j, N in enumerate(horizons):
        B_blocks.append(np.hstack([model.B[:, j:j + 1], np.zeros((model.n_states, N))]))
        D_blocks.append(np.hstack([model.D[:, j:j + 1], np.zeros((model.n_outputs, N))]))
    return model.replace(B=np.hstack(B_blocks), D=np.hstack(D_blocks))


def lift_input(model: StateSpaceModel, N: int) -> StateSpaceModel:
    """Lift a single-input model to the (N+1)-entry preview command."""
    if model.n_inputs != 1:
        raise ConfigurationError(
            f"lift_input expects a single-input model, got {model.n_inputs} inputs")
    return lift_input_multi(model, [N])


def _trim(poly) -> np.ndarray:
    """Drop negligible leading coefficients; the zero polynomial is [0.]."""
    poly = np.atleast_1d(np.array(poly, dtype=float))
    scale = np.max(np.abs(poly), initial=0.0)
    if scale == 0.0:
        return np.zeros(1)
    nonzero = np.flatnonzero(np.abs(poly) > 1e-12 * scale)
    return poly[nonzero[0]:]


def _is_zero(poly: np.ndarray) -> bool:
    return bool(np.all(poly == 0.0))


@dataclass(frozen=True, eq=False)
class RationalTF:
    """
    Matrix of rational functions in the forward-shift variable z.

    numerators[i][j] / denominators[i][j] maps input j to output i;
    coefficients are highest power first.
    """

    numerators: Tuple[Tuple[np.ndarray, ...], ...]
    denominators: Tuple[Tuple[np.ndarray, ...], ...]
    sample_time: Optional[float] = None

    def __post_init__(self):
        nums = tuple(tuple(_trim(entry) for entry in row) for row in self.numerators)
        dens = tuple(tuple(_trim(entry) for entry in row) for row in self.denominators)
        if len(nums) != len(dens) or any(len(a) != len(b) for a, b in zip(nums, dens)):
            raise ConfigurationError("Numerator and denominator arrays must have the same shape")
        if len({len(row) for row in nums}) > 1:
            raise ConfigurationError("Transfer matrix rows must have equal length")
        for i, row in enumerate(dens):
            for j, den in enumerate(row):
                if _is_zero(den):
                    raise ConfigurationError(f"Denominator of entry ({i},{j}) is zero")
        object.__setattr__(self, 'numerators', nums)
        object.__setattr__(self, 'denominators', dens)

    @property
    def shape(self) -> Tuple[int, int]:
        return len(self.numerators), len(self.numerators[0]) if self.numerators else 0

    def entry(self, i: int, j: int) -> Tuple[np.ndarray, np.ndarray]:
        return self.numerators[i][j], self.denominators[i][j]

    def is_proper(self, i: int, j: int) -> bool:
        num, den = self.entry(i, j)
        return _is_zero(num) or num.size <= den.size

    def evaluate(self, z: complex) -> np.ndarray:
        p, m = self.shape
        out = np.zeros((p, m), dtype=complex)
        for i in range(p):
            for j in range(m):
                num, den = self.entry(i, j)
                out[i, j] = np.polyval(num, z) / np.polyval(den, z)
        return out

    def minimal(self) -> 'RationalTF':
        """Same transfer matrix with common numerator/denominator roots cancelled."""
        pairs = [[_cancel(num, den) for num, den in zip(nums, dens)]
                 for nums, dens in zip(self.numerators, self.denominators)]
        return RationalTF([[pair[0] for pair in row] for row in pairs],
                          [[pair[1] for pair in row] for row in pairs], self.sample_time)

    @classmethod
    def static_gain(cls, K, sample_time: Optional[float] = None) -> 'RationalTF':
        K = as_matrix(K, 'K')
        nums = [[np.array([K[i, j]]) for j in range(K.shape[1])] for i in range(K.shape[0])]
        dens = [[np.ones(1) for _ in range(K.shape[1])] for _ in range(K.shape[0])]
        return cls(nums, dens, sample_time)

    @classmethod
    def diagonal(cls, entries: Sequence[Tuple[np.ndarray, np.ndarray]],
                 sample_time: Optional[float] = None) -> 'RationalTF':
        m = len(entries)
        nums = [[entries[i][0] if i == j else np.zeros(1) for j in range(m)] for i in range(m)]
        dens = [[entries[i][1] if i == j else np.ones(1) for j in range(m)] for i in range(m)]
        return cls(nums, dens, sample_time)


def tf_from_ss(model: StateSpaceModel) -> RationalTF:
    """Transfer matrix of a stable model; every entry shares det(zI - A)."""
    model.assert_stable('Model')
    p, m = model.n_outputs, model.n_inputs
    if model.n_states == 0:
        return RationalTF.static_gain(model.D, model.sample_time)

    nums = [[None] * m for _ in range(p)]
    dens = [[None] * m for _ in range(p)]
    for j in range(m):
        num, den = signal.ss2tf(model.A, model.B, model.C, model.D, input=j)
        num = np.atleast_2d(num)
        for i in range(p):
            nums[i][j] = num[i]
            dens[i][j] = np.array(den, dtype=float)
    return RationalTF(nums, dens, model.sample_time)


def realize_tf(tf: RationalTF) -> StateSpaceModel:
    """
    Block-assembled realization: one controllable-canonical block per
    non-constant entry, input j driving the blocks of column j.
    """
    p, m = tf.shape
    blocks = []
    D = np.zeros((p, m))
    for i in range(p):
        for j in range(m):
            num, den = tf.entry(i, j)
            if not tf.is_proper(i, j):
                raise ConfigurationError(f"Transfer function entry ({i},{j}) is improper")
            if _is_zero(num):
                continue
            if den.size == 1:
                D[i, j] += num[0] / den[0]
                continue
            A_k, B_k, C_k, D_k = signal.tf2ss(num, den)
            blocks.append((i, j, A_k, B_k, C_k))
            D[i, j] += float(np.asarray(D_k).reshape(-1)[0])

    if not blocks:
        return StateSpaceModel(np.zeros((0, 0)), np.zeros((0, m)), np.zeros((p, 0)), D,
                               sample_time=tf.sample_time)

    A = block_diag(*[b[2] for b in blocks])
    B = np.zeros((A.shape[0], m))
    C = np.zeros((p, A.shape[0]))
    offset = 0
    for i, j, A_k, B_k, C_k in blocks:
        size = A_k.shape[0]
        B[offset:offset + size, j] = B_k[:, 0]
        C[i, offset:offset + size] = C_k[0]
        offset += size
    return StateSpaceModel(A, B, C, D, sample_time=tf.sample_time)


def _root_clusters(roots: np.ndarray) -> List[List[complex]]:
    """Group roots lying within the cluster tolerance of a group's mean (split multiple roots)."""
    clusters: List[List[complex]] = []
    for root in sorted((complex(r) for r in roots), key=lambda r: (r.real, r.imag)):
        for cluster in clusters:
            center = complex(np.mean(cluster))
            if abs(root - center) <= TOLERANCES.root_cluster * (1.0 + abs(center)):
                cluster.append(root)
                break
        else:
            clusters.append([root])
    return clusters


def _cancel(num: np.ndarray, den: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    Remove common roots of num and den.

    Simple roots pair within the cancellation tolerance. A multiple root comes
    back from np.roots split by about sqrt(eps), so clusters pair by their
    means within the looser cluster tolerance and cancel min(multiplicities)
    copies.
    """
    num, den = _trim(num), _trim(den)
    if _is_zero(num):
        return np.zeros(1), np.ones(1)
    if num.size == den.size and np.allclose(num / num[0], den / den[0], rtol=1e-12, atol=1e-14):
        return np.array([num[0] / den[0]]), np.ones(1)
    if num.size == 1 or den.size == 1:
        return num, den

    num_clusters = _root_clusters(np.roots(num))
    den_clusters = _root_clusters(np.roots(den))
    cancelled = False
    for cluster in num_clusters:
        if not den_clusters:
            break
        center = complex(np.mean(cluster))
        distances = [abs(center - complex(np.mean(other))) for other in den_clusters]
        k = int(np.argmin(distances))
        other = den_clusters[k]
        tol = TOLERANCES.root_cluster if len(cluster) > 1 or len(other) > 1 else TOLERANCES.cancellation
        if distances[k] <= tol * (1.0 + abs(center)):
            count = min(len(cluster), len(other))
            del cluster[:count]
            del other[:count]
            if not other:
                den_clusters.pop(k)
            cancelled = True
    if not cancelled:
        return num, den
    num_roots = [root for cluster in num_clusters for root in cluster]
    den_roots = [root for cluster in den_clusters for root in cluster]
    return (num[0] * np.real(np.poly(num_roots)) if num_roots else np.array([num[0]]),
            den[0] * np.real(np.poly(den_roots)) if den_roots else np.array([den[0]]))


def _poly_det(P: List[List[np.ndarray]]) -> np.ndarray:
    """Determinant of a square polynomial matrix by cofactor expansion."""
    size = len(P)
    if size == 1:
        return P[0][0]
    total = np.zeros(1)
    for j in range(size):
        minor = [row[:j] + row[j + 1:] for row in P[1:]]
        term = np.polymul(P[0][j], _poly_det(minor))
        total = np.polyadd(total, term) if j % 2 == 0 else np.polysub(total, term)
    return total


def _roots_stable(den: np.ndarray, discrete: bool) -> bool:
    if den.size <= 1:
        return True
    roots = np.roots(den)
    return bool(np.all(np.abs(roots) < 1.0)) if discrete else bool(np.all(roots.real < 0.0))


def build_decoupler(G: RationalTF) -> Tuple[RationalTF, RationalTF, RationalTF]:
    """
    Return (F, F_inv, W) with W = diag(G_11..G_mm) and F = G^-1 W.

    Entries are brought to a common denominator d so G = N/d; then
    F_ij = adj(N)_ij N_jj / det(N) and (F_inv)_ij = N_ij / N_ii.
    """
    p, m = G.shape
    if p != m:
        raise ConfigurationError(f"Decoupling needs a square transfer matrix, got {p}x{m}")

    # Common denominator as the product of the distinct (monic) denominators
    distinct: List[np.ndarray] = []
    for i in range(m):
        for j in range(m):
            den = G.denominators[i][j] / G.denominators[i][j][0]
            if not any(d.size == den.size and np.allclose(d, den, rtol=1e-12, atol=1e-14) for d in distinct):
                distinct.append(den)

    N = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            num, den = G.entry(i, j)
            poly = num / den[0]
            monic = den / den[0]
            matched = False
            for d in distinct:
                if not matched and d.size == monic.size and np.allclose(d, monic, rtol=1e-12, atol=1e-14):
                    matched = True
                    continue
                poly = np.polymul(poly, d)
            N[i][j] = _trim(poly)

    det = _trim(_poly_det(N))
    if _is_zero(det):
        raise ConfigurationError("Transfer matrix determinant is identically zero")

    discrete = G.sample_time is not None
    F_nums = [[None] * m for _ in range(m)]
    F_dens = [[None] * m for _ in range(m)]
    Finv_nums = [[None] * m for _ in range(m)]
    Finv_dens = [[None] * m for _ in range(m)]
    for i in range(m):
        for j in range(m):
            # adj(N)_ij is the (j, i) cofactor
            minor = [row[:i] + row[i + 1:] for k, row in enumerate(N) if k != j]
            cofactor = _poly_det(minor) if minor else np.ones(1)
            if (i + j) % 2:
                cofactor = -cofactor
            num, den = _cancel(np.polymul(cofactor, N[j][j]), det)
            if num.size > den.size and not _is_zero(num):
                raise ConfigurationError(f"Decoupler entry F({i},{j}) is improper")
            if not _roots_stable(den, discrete):
                raise ConfigurationError(f"Decoupler entry F({i},{j}) is unstable")
            F_nums[i][j], F_dens[i][j] = num, den

            if _is_zero(N[i][i]):
                raise ConfigurationError(f"Diagonal entry G({i},{i}) is zero; cannot invert W")
            num, den = _cancel(N[i][j], N[i][i])
            if num.size > den.size and not _is_zero(num):
                raise ConfigurationError(f"Prefilter entry F_inv({i},{j}) is improper")
            if not _roots_stable(den, discrete):
                raise ConfigurationError(f"Prefilter entry F_inv({i},{j}) is unstable")
            Finv_nums[i][j], Finv_dens[i][j] = num, den

    W = RationalTF.diagonal([G.entry(i, i) for i in range(m)], G.sample_time)
    F = RationalTF(F_nums, F_dens, G.sample_time)
    F_inv = RationalTF(Finv_nums, Finv_dens, G.sample_time)
    logger.info(f"Built {m}x{m} decoupler")
    return F, F_inv, W
