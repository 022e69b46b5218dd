import pytest
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from src.modules.errors import ConfigurationError
from src.modules.numerics import (INFEASIBLE, OPTIMAL, UNBOUNDED, LpProblem, QpProblem, as_matrix,
                                  as_vector, matrix_exponential, solve_lp, solve_qp,
                                  spectral_radius)

def test_as_matrix_shapes():
    """Scalars and 1-D inputs are promoted to 2-D."""
    assert as_matrix(3.0).shape == (1, 1)
    assert as_matrix([1.0, 2.0]).shape == (1, 2)
    assert as_matrix([[1.0], [2.0]], rows=2, cols=1).shape == (2, 1)

def test_as_matrix_rejects_bad_input():
    """Non-finite entries and wrong shapes raise ConfigurationError."""
    with pytest.raises(ConfigurationError):
        as_matrix([[np.inf]])
    with pytest.raises(ConfigurationError):
        as_matrix([[1.0, 2.0]], rows=2)
    with pytest.raises(ConfigurationError):
        as_matrix(np.zeros((2, 2, 2)))
    with pytest.raises(ConfigurationError) as exc_info:
        as_vector([1.0, 2.0], 'x', length=3)
    assert "length 3" in str(exc_info.value)

def test_spectral_radius():
    assert spectral_radius(np.diag([0.5, -0.9])) == pytest.approx(0.9)
    assert spectral_radius(np.zeros((0, 0))) == 0.0

def test_matrix_exponential_matches_series():
    """exp(Mt) agrees with a truncated Taylor series for a small matrix."""
    M = np.array([[0.0, 1.0], [-2.0, -0.3]])
    t = 0.1
    series = np.eye(2)
    term = np.eye(2)
    for k in range(1, 20):
        term = term @ (M * t) / k
        series = series + term
    assert np.allclose(matrix_exponential(M, t), series, atol=1e-12)

def test_matrix_exponential_requires_square():
    with pytest.raises(ConfigurationError):
        matrix_exponential(np.ones((2, 3)))

def test_solve_lp_simple():
    """maximize x + y over the unit simplex-like region."""
    problem = LpProblem([1.0, 1.0], [[1.0, 2.0], [3.0, 1.0]], [4.0, 6.0], [0.0, 0.0])
    outcome = solve_lp(problem)
    assert outcome.status == OPTIMAL
    assert outcome.is_optimal
    assert outcome.value == pytest.approx(2.8)
    assert np.allclose(outcome.x, [1.6, 1.2])

@pytest.mark.parametrize("seed", [0, 1, 2, 3, 4])
def test_solve_lp_matches_reference_solver(seed):
    """Random bounded LPs agree with scipy's HiGHS on the optimal value."""
    rng = np.random.default_rng(seed)
    n, m = 4, 10
    A = rng.normal(size=(m, n))
    b = rng.uniform(0.5, 2.0, size=m)
    c = rng.normal(size=n)
    lower, upper = -5.0 * np.ones(n), 5.0 * np.ones(n)

    outcome = solve_lp(LpProblem(c, A, b, lower, upper))
    reference = linprog(-c, A_ub=A, b_ub=b, bounds=list(zip(lower, upper)), method='highs')

    assert reference.status == 0
    assert outcome.status == OPTIMAL
    assert outcome.value == pytest.approx(-reference.fun, abs=1e-7)
    assert np.all(A @ outcome.x <= b + 1e-7)

def test_solve_lp_free_variables():
    """Free variables are split internally; the optimum can be negative."""
    outcome = solve_lp(LpProblem([-1.0], [[-1.0]], [3.0]))
    assert outcome.status == OPTIMAL
    assert outcome.x[0] == pytest.approx(-3.0)

def test_solve_lp_upper_only_bound():
    outcome = solve_lp(LpProblem([1.0], np.zeros((0, 1)), [], None, [2.5]))
    assert outcome.status == OPTIMAL
    assert outcome.x[0] == pytest.approx(2.5)

def test_solve_lp_infeasible():
    outcome = solve_lp(LpProblem([1.0], [[1.0], [-1.0]], [1.0, -2.0]))
    assert outcome.status == INFEASIBLE
    assert outcome.x is None

def test_solve_lp_crossed_bounds_infeasible():
    outcome = solve_lp(LpProblem([1.0], np.zeros((0, 1)), [], [1.0], [0.0]))
    assert outcome.status == INFEASIBLE

def test_solve_lp_unbounded():
    outcome = solve_lp(LpProblem([1.0, 0.0], [[0.0, 1.0]], [1.0]))
    assert outcome.status == UNBOUNDED

def test_solve_lp_degenerate_vertex():
    """Several constraints active at the optimum do not stall the solver."""
    A = [[1.0, 0.0], [0.0, 1.0], [1.0, 1.0], [2.0, 1.0], [1.0, 2.0]]
    b = [1.0, 1.0, 2.0, 3.0, 3.0]
    outcome = solve_lp(LpProblem([1.0, 1.0], A, b, [0.0, 0.0]))
    assert outcome.status == OPTIMAL
    assert outcome.value == pytest.approx(2.0)

def test_qp_problem_validation():
    """Q must be symmetric positive definite."""
    with pytest.raises(ConfigurationError):
        QpProblem([[1.0, 2.0], [0.0, 1.0]], [0.0, 0.0], np.zeros((0, 2)), [])
    with pytest.raises(ConfigurationError):
        QpProblem([[1.0, 0.0], [0.0, -1.0]], [0.0, 0.0], np.zeros((0, 2)), [])

def test_solve_qp_unconstrained_minimizer_feasible():
    outcome = solve_qp(QpProblem(np.eye(2), [-1.0, -1.0], [[1.0, 0.0]], [5.0]))
    assert outcome.status == OPTIMAL
    assert np.allclose(outcome.x, [1.0, 1.0])
    assert outcome.active == ()

def test_solve_qp_projection_onto_halfspace():
    """Projection of (2, 2) onto x + y <= 1 is (0.5, 0.5)."""
    outcome = solve_qp(QpProblem(np.eye(2), [-2.0, -2.0], [[1.0, 1.0]], [1.0]))
    assert outcome.status == OPTIMAL
    assert np.allclose(outcome.x, [0.5, 0.5], atol=1e-8)
    assert outcome.active == (0,)
    assert outcome.multipliers[0] == pytest.approx(1.5)

def test_solve_qp_box_corner():
    """Projection of (3, -3) onto the unit box is its corner (1, -1)."""
    G = np.vstack([np.eye(2), -np.eye(2)])
    h = np.ones(4)
    outcome = solve_qp(QpProblem(np.eye(2), [-3.0, 3.0], G, h))
    assert outcome.status == OPTIMAL
    assert np.allclose(outcome.x, [1.0, -1.0], atol=1e-8)
    assert outcome.value == pytest.approx(0.5 * 2 - 6.0)

def test_solve_qp_infeasible():
    outcome = solve_qp(QpProblem(np.eye(1), [-5.0], [[1.0], [-1.0]], [1.0, -2.0]))
    assert outcome.status == INFEASIBLE

def enumerate_active_sets(Q, q, G, h):
    """Smallest objective over the equality-constrained minimizers of every feasible active set."""
    n = q.size
    best_x, best_value = None, np.inf
    for k in range(n + 1):
        for active in combinations(range(G.shape[0]), k):
            Gs = G[list(active)]
            kkt = np.block([[Q, Gs.T], [Gs, np.zeros((k, k))]])
            try:
                solution = np.linalg.solve(kkt, np.concatenate([-q, h[list(active)]]))
            except np.linalg.LinAlgError:
                continue
            z = solution[:n]
            if np.all(G @ z <= h + 1e-9):
                value = 0.5 * z @ Q @ z + q @ z
                if value < best_value:
                    best_x, best_value = z, value
    return best_x, best_value

@pytest.mark.parametrize("seed", range(10))
def test_solve_qp_matches_active_set_enumeration(seed):
    """The active-set QP finds the same minimizer as enumerating every active set."""
    rng = np.random.default_rng(seed)
    n, m = 3, 7
    M = rng.normal(size=(n, n))
    Q = M @ M.T + n * np.eye(n)
    q = rng.normal(scale=5.0, size=n)
    G = rng.normal(size=(m, n))
    h = rng.uniform(0.2, 1.0, size=m)
    outcome = solve_qp(QpProblem(Q, q, G, h))
    expected_x, expected_value = enumerate_active_sets(Q, q, G, h)
    assert outcome.status == OPTIMAL
    assert outcome.value == pytest.approx(expected_value, rel=1e-7, abs=1e-9)
    assert np.allclose(outcome.x, expected_x, atol=1e-6)
