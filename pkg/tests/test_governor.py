import pytest
import numpy as np
from unittest.mock import patch

from src.constants.models import ONE_LINK_REFERENCE
from src.modules.config import GovernorSpec
from src.modules.errors import (ConfigurationError, GovernorInitializationError,
                                InputValidationError)
from src.modules.governor import (CommandGovernor, DisturbancePreviewGovernor,
                                  LambdaPreviewGovernor, MultiHorizonGovernor,
                                  MultiInputPreviewGovernor, PreviewReferenceGovernor,
                                  ScalarReferenceGovernor, StepInput, explicit_kappa, lp_kappa,
                                  multi_n_padding)
from src.modules.mas import (PreviewAMatrix, build_lifted_mas, build_mas, build_robust_mas)
from src.modules.polytope import Polytope
from src.modules.scenario import (ReferenceTrajectory, get_scenario, make_governor, run_scenario,
                                  simulate)
from src.modules.sysmod import DisturbedModel, StateSpaceModel, lift_input, lift_input_multi

REFERENCE = [0.0, 0.5, 2.0, 2.0, 2.0, -3.0, -3.0, 0.3, 0.3, 0.9, 0.9, 0.0]

@pytest.fixture(scope="module")
def srg_set(first_order, first_order_y):
    return build_mas(first_order, first_order_y)

@pytest.fixture(scope="module")
def prg_set(first_order, first_order_y):
    return build_lifted_mas(lift_input(first_order, 2), PreviewAMatrix.delay(2), first_order_y)

def preview(sequence, k, rows):
    """rows samples from k on, holding the final value."""
    return np.array([sequence[min(k + j, len(sequence) - 1)] for j in range(rows)])

def run(governor, model, sequence, x0=None):
    """Drive a single-channel governor over sequence and return the applied commands."""
    x = np.zeros(model.n_states) if x0 is None else np.array(x0, dtype=float)
    governor.initialize(x, preview(sequence, 0, governor.preview_rows))
    commands = []
    for k in range(len(sequence)):
        result = governor.step(x, preview(sequence, k, governor.preview_rows))
        commands.append(result.v[0])
        x = model.A @ x + model.B[:, 0] * result.v[0]
    return np.array(commands)

def test_explicit_kappa_cases():
    assert explicit_kappa(np.array([1.0, 2.0]), np.array([0.5, 0.5])) == pytest.approx(0.25)
    assert explicit_kappa(np.array([1.0]), np.array([-0.1])) == 0.0
    assert explicit_kappa(np.array([-1.0, 0.0]), np.array([0.5, 0.5])) == 1.0
    assert explicit_kappa(np.array([0.1]), np.array([5.0])) == 1.0
    assert explicit_kappa(np.zeros(3), np.ones(3)) == 1.0

@pytest.mark.parametrize("seed", [0, 1, 2])
def test_lp_kappa_matches_explicit(seed):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=20)
    b = rng.uniform(0.0, 1.0, size=20)
    assert lp_kappa(a, b) == pytest.approx(explicit_kappa(a, b), abs=1e-9)

def test_explicit_kappa_equals_lp_optimum_on_lifted_set(one_link_lifted_25):
    """On 1000 random admissible one-link N=25 instances the one-pass κ is the LP optimum."""
    aset = one_link_lifted_25
    rng = np.random.default_rng(7)
    compared = interior = 0
    for _ in range(20000):
        x = rng.uniform(-1.0, 1.0, 2) * np.array([10.0, 50.0])
        base = rng.uniform(-35.0, 35.0) + rng.uniform(-5.0, 5.0, aset.n_commands)
        b = aset.margin(x, base)
        if np.any(b < 0.0):
            continue
        target = rng.uniform(-90.0, 90.0, aset.n_commands)
        a = aset.H_v @ (target - base)
        kappa = explicit_kappa(a, b)
        assert kappa == pytest.approx(lp_kappa(a, b), abs=1e-7)
        compared += 1
        interior += 0.0 < kappa < 1.0
        if compared == 1000:
            break
    assert compared == 1000
    assert interior >= 100

def test_multi_n_padding():
    M = multi_n_padding(1, 3)
    assert np.array_equal(M @ np.array([1.0, 2.0, 3.0, 4.0]), [1.0, 2.0, 2.0, 2.0])
    assert np.array_equal(multi_n_padding(3, 3), np.eye(4))
    with pytest.raises(ConfigurationError):
        multi_n_padding(4, 3)

def test_step_input_shapes():
    assert StepInput.build([0.0], 1.5).r_preview.shape == (1, 1)
    assert StepInput.build([0.0], [1.0, 2.0, 3.0]).r_preview.shape == (3, 1)
    assert StepInput.build([0.0], [1.0, 2.0], channels=2).r_preview.shape == (1, 2)

def test_step_input_validation():
    with pytest.raises(InputValidationError):
        StepInput.build([0.0], [[1.0, 2.0]], channels=1)
    with pytest.raises(InputValidationError):
        StepInput.build([0.0], [np.nan])
    with pytest.raises(InputValidationError):
        StepInput.build([0.0, 1.0], [1.0], n_states=1)
    with pytest.raises(InputValidationError):
        StepInput.build([0.0], [1.0], rows=2)

def test_srg_step_saturates_at_steady_bound(srg_set):
    governor = ScalarReferenceGovernor(srg_set)
    governor.initialize([0.0], 0.0)
    result = governor.step([0.0], 2.0)
    assert result.kappa == pytest.approx(0.495)
    assert result.v[0] == pytest.approx(0.99)

def test_srg_initializes_at_first_reference(srg_set):
    governor = ScalarReferenceGovernor(srg_set)
    state = governor.initialize([0.0], 0.5)
    assert state.v_N[0] == pytest.approx(0.5)
    # Inadmissible first reference falls back to rest
    governor.initialize([0.0], 5.0)
    assert governor.v_N[0] == 0.0

def test_initialize_rejects_inadmissible_state(srg_set):
    governor = ScalarReferenceGovernor(srg_set)
    with pytest.raises(GovernorInitializationError):
        governor.initialize([5.0], 0.0)

def test_step_before_initialize(srg_set):
    governor = ScalarReferenceGovernor(srg_set)
    with pytest.raises(GovernorInitializationError):
        governor.step([0.0], 0.0)

def test_exact_lp_matches_explicit(first_order, prg_set):
    explicit = run(PreviewReferenceGovernor(prg_set, PreviewAMatrix.delay(2)), first_order, REFERENCE)
    exact = run(PreviewReferenceGovernor(prg_set, PreviewAMatrix.delay(2), exact_lp=True), first_order, REFERENCE)
    assert np.allclose(explicit, exact, atol=1e-8)

def test_srg_identical_to_zero_horizon_prg(first_order, first_order_y, srg_set):
    lifted = build_lifted_mas(lift_input(first_order, 0), PreviewAMatrix.delay(0), first_order_y)
    srg = run(ScalarReferenceGovernor(srg_set), first_order, REFERENCE)
    prg = run(PreviewReferenceGovernor(lifted, PreviewAMatrix.delay(0)), first_order, REFERENCE)
    assert np.array_equal(srg, prg)

def test_governed_outputs_respect_constraints(first_order, prg_set):
    governor = PreviewReferenceGovernor(prg_set, PreviewAMatrix.delay(2))
    commands = run(governor, first_order, REFERENCE)
    x = 0.0
    for v in commands:
        assert abs(x) <= 1.0 + 1e-9
        x = 0.5 * x + 0.5 * v
    assert governor.is_recursively_feasible([x])

def test_kappa_always_in_unit_interval(one_link, one_link_prg_set, one_link_y):
    governor = PreviewReferenceGovernor(one_link_prg_set, PreviewAMatrix.delay(5))
    reference = ReferenceTrajectory(ONE_LINK_REFERENCE, 0.01)
    result = run_scenario(one_link, governor, reference, one_link_y, 100)
    assert result.violations == 0
    assert np.all((result.kappa >= 0.0) & (result.kappa <= 1.0))
    assert np.max(np.abs(result.y)) <= 45.0 + 1e-6

def test_lift_reference_holds_short_preview(prg_set):
    governor = PreviewReferenceGovernor(prg_set, PreviewAMatrix.delay(2))
    lifted = governor.lift_reference(np.array([[1.0], [2.0]]))
    assert lifted.tolist() == [1.0, 2.0, 2.0]

def test_multi_horizon_tie_prefers_longest(one_link_prg_set):
    governor = MultiHorizonGovernor(one_link_prg_set, [0, 2, 5])
    governor.initialize(np.zeros(2), np.zeros(6))
    result = governor.step(np.zeros(2), np.zeros(6))
    assert result.kappas.tolist() == [1.0, 1.0, 1.0]
    assert result.i_star == 2

def test_multi_horizon_picks_largest_kappa(one_link, one_link_prg_set, one_link_y):
    governor = MultiHorizonGovernor(one_link_prg_set, [0, 2, 5])
    reference = ReferenceTrajectory(ONE_LINK_REFERENCE, 0.01)
    result = run_scenario(one_link, governor, reference, one_link_y, 80)
    assert result.violations == 0
    kappas = result.extras['kappas']
    assert kappas.shape == (80, 3)
    assert np.allclose(result.kappa, kappas.max(axis=1))
    assert np.all(result.extras['i_star'] < 3)

def test_multi_horizon_rejects_unsorted(one_link_prg_set):
    with pytest.raises(ConfigurationError):
        MultiHorizonGovernor(one_link_prg_set, [2, 0, 5])

def test_lambda_governor_requires_lambda_matrix(prg_set):
    with pytest.raises(ConfigurationError):
        LambdaPreviewGovernor(prg_set, PreviewAMatrix.delay(2))

def test_lambda_ones_matches_delay(first_order, first_order_y, prg_set):
    a_bar = PreviewAMatrix.lambda_shift([1.0, 1.0])
    lam_set = build_lifted_mas(lift_input(first_order, 2), a_bar, first_order_y)
    lam = run(LambdaPreviewGovernor(lam_set, a_bar), first_order, REFERENCE)
    prg = run(PreviewReferenceGovernor(prg_set, PreviewAMatrix.delay(2)), first_order, REFERENCE)
    assert np.array_equal(lam, prg)

def test_lambda_zero_matches_srg_on_one_link_scenario():
    """λ = 0 collapses the preview onto the current command: the whole one-link run equals SRG exactly."""
    scenario = get_scenario('one_link')
    lam = simulate(scenario, GovernorSpec(variant='lambda_prg', lambdas=[0.0] * 4))
    srg = simulate(scenario, GovernorSpec(variant='srg'))
    assert lam.steps == srg.steps == 150
    assert np.array_equal(lam.v, srg.v)
    assert np.array_equal(lam.kappa, srg.kappa)
    assert np.max(np.abs(lam.v)) <= 0.99 * 45.0 + 1e-6

def test_multi_input_lift_reference():
    model = StateSpaceModel(np.diag([0.5, 0.5]), np.diag([0.5, 0.5]), np.eye(2), np.zeros((2, 2)), sample_time=0.1)
    a_bar = PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(1), PreviewAMatrix.delay(2)])
    aset = build_lifted_mas(lift_input_multi(model, [1, 2]), a_bar, Polytope.symmetric_box([1.0, 1.0]))
    governor = MultiInputPreviewGovernor(aset, a_bar)
    assert governor.preview_rows == 3
    r = np.array([[1.0, 2.0], [3.0, 4.0], [5.0, 6.0]])
    assert governor.lift_reference(r).tolist() == [1.0, 3.0, 2.0, 4.0, 6.0]
    governor.initialize(np.zeros(2), r * 0.1)
    result = governor.step(np.zeros(2), r * 0.1)
    assert result.v.shape == (2,)
    assert 0.0 <= result.kappa <= 1.0
    with pytest.raises(InputValidationError):
        governor.step(np.zeros(2), np.ones((3, 3)))

def test_robust_governor_with_zero_disturbance_matches_srg(first_order, first_order_y, srg_set):
    W = Polytope.box([0.0], [0.0])
    disturbed = DisturbedModel(first_order, [[1.0]], [[0.0]], W)
    governor = DisturbancePreviewGovernor(build_robust_mas(disturbed, first_order_y), W)
    assert governor.variant == 'robust_srg'
    assert np.allclose(run(governor, first_order, REFERENCE),
                       run(ScalarReferenceGovernor(srg_set), first_order, REFERENCE), atol=1e-9)

def test_disturbance_governor_validates_preview(first_order, first_order_y):
    disturbed = DisturbedModel(first_order, [[1.0]], [[0.0]], Polytope.box([-0.1], [0.1]))
    governor = make_governor(first_order, first_order_y, GovernorSpec(variant='disturbance_prg', N=1), disturbed)
    assert governor.n_previewed == 2
    with pytest.raises(InputValidationError):
        governor.initialize([0.0], 0.0)
    with pytest.raises(InputValidationError):
        governor.initialize([0.0], 0.0, [0.5, 0.0])
    governor.initialize([0.0], 0.0, [0.05, -0.05])
    result = governor.step([0.0], 0.5, [0.1, 0.1])
    assert 0.0 <= result.kappa <= 1.0

def test_disturbance_governor_needs_disturbance_columns(srg_set):
    with pytest.raises(ConfigurationError):
        DisturbancePreviewGovernor(srg_set, Polytope.box([-0.1], [0.1]))

def test_command_governor_projects_reference(srg_set):
    governor = CommandGovernor(srg_set, PreviewAMatrix.delay(0))
    governor.initialize([0.0], 0.0)
    result = governor.step([0.0], 2.0)
    assert result.v[0] == pytest.approx(0.99, abs=1e-8)
    assert np.isnan(result.kappa)

def test_command_governor_infeasible_holds_command(srg_set):
    governor = CommandGovernor(srg_set, PreviewAMatrix.delay(0))
    governor.initialize([0.0], 0.3)
    with patch('src.modules.governor.logger') as mock_logger:
        result = governor.step([5.0], 2.0)
        mock_logger.warning.assert_called_once()
    assert result.v[0] == pytest.approx(0.3)

def test_decoupled_governor_on_diagonal_plant(first_order):
    """With a diagonal plant the decoupled governor matches independent per-channel governors."""
    model = StateSpaceModel(np.diag([0.5, 0.8]), np.diag([0.5, 0.2]), np.eye(2), np.zeros((2, 2)), sample_time=0.1)
    Y = Polytope.symmetric_box([1.0, 1.0])
    drg = make_governor(model, Y, GovernorSpec(variant='drg_prg', horizons=[2, 2]))

    channels = [first_order, StateSpaceModel([[0.8]], [[0.2]], [[1.0]], [[0.0]], sample_time=0.1)]
    singles = [PreviewReferenceGovernor(build_lifted_mas(lift_input(ch, 2), PreviewAMatrix.delay(2),
                                                         Polytope.symmetric_box([1.0])),
                                        PreviewAMatrix.delay(2)) for ch in channels]

    sequence = np.array([[0.0, 0.0], [2.0, -0.5], [2.0, -0.5], [2.0, 0.8], [-1.0, 0.8],
                         [-1.0, 0.8], [0.3, 0.0], [0.3, 0.0]])
    x = np.zeros(2)
    xs = [np.zeros(1), np.zeros(1)]
    drg.initialize(x, preview(sequence, 0, 3))
    for i, single in enumerate(singles):
        single.initialize(xs[i], preview(sequence[:, i], 0, 3))

    for k in range(len(sequence)):
        result = drg.step(x, preview(sequence, k, 3))
        assert result.kappas.shape == (2,)
        for i, single in enumerate(singles):
            expected = single.step(xs[i], preview(sequence[:, i], k, 3)).v[0]
            assert result.v[i] == pytest.approx(expected, abs=1e-6)
            xs[i] = channels[i].A @ xs[i] + channels[i].B[:, 0] * expected
        x = model.A @ x + model.B @ result.v
        assert np.all(np.abs(x) <= 1.0 + 1e-6)
    assert drg.is_recursively_feasible(x)
