"""
Module for closed-loop experiments: reference trajectories, the scenario
registry, the governor factory, simulation and timing comparison.
"""

import logging
import os
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.constants import models as presets
from .config import GovernorSpec, ScenarioDocument, load_scenario_document, model_from_document
from .errors import AssertionFailedError, ConfigurationError
from .governor import (CommandGovernor, DecoupledPreviewGovernor, DisturbancePreviewGovernor,
                       LambdaPreviewGovernor, MultiHorizonGovernor, MultiInputPreviewGovernor,
                       PreviewReferenceGovernor, ScalarReferenceGovernor)
from .mas import (AdmissibleSet, PreviewAMatrix, build_disturbance_preview_mas, build_lifted_mas,
                  build_mas, build_robust_mas)
from .polytope import Polytope
from .sysmod import (DisturbedModel, StateSpaceModel, close_state_feedback, discretize_zoh,
                     lift_input, lift_input_multi, step, tf_from_ss)

logger = logging.getLogger(__name__)

# set_provider(key, builder) returns the set for the construction inputs in key
SetProvider = Callable[[Dict, Callable[[], AdmissibleSet]], AdmissibleSet]


class ReferenceTrajectory:
    """
    Piecewise-constant reference given by (start time, values) breakpoints.

    Corruption windows (t_from, t_to, values) replace the preview entries
    that fall inside the window; the current entry always comes from the
    actual trajectory.
    """

    def __init__(self, breakpoints: Sequence[Tuple[float, Sequence[float]]], sample_time: float,
                 corruptions: Sequence[Tuple[float, float, Sequence[float]]] = ()):
        if not breakpoints:
            raise ConfigurationError("Reference needs at least one breakpoint")
        times = [float(t) for t, _ in breakpoints]
        if any(b <= a for a, b in zip(times, times[1:])):
            raise ConfigurationError(f"Breakpoint times must be strictly increasing, got {times}")
        if not sample_time > 0:
            raise ConfigurationError(f"Sample time must be positive, got {sample_time}")
        self.times = np.array(times)
        self.values = np.array([np.atleast_1d(np.array(v, dtype=float)) for _, v in breakpoints])
        self.sample_time = float(sample_time)
        self.corruptions = [(float(a), float(b), np.atleast_1d(np.array(v, dtype=float)))
                            for a, b, v in corruptions]
        for _, _, values in self.corruptions:
            if values.size != self.channels:
                raise ConfigurationError("Corruption values must have one entry per channel")

    @property
    def channels(self) -> int:
        return self.values.shape[1]

    def _time(self, k: int) -> float:
        # Guard against k·Ts landing just below a breakpoint
        return k * self.sample_time + 1e-9

    def value(self, k: int) -> np.ndarray:
        """Actual reference at sample k (the final value holds past the last breakpoint)."""
        index = int(np.searchsorted(self.times, self._time(k), side='right')) - 1
        return self.values[max(index, 0)].copy()

    def assumed(self, k: int) -> np.ndarray:
        """Reference at sample k as reported by the preview."""
        t = self._time(k)
        for start, end, values in self.corruptions:
            if start <= t <= end:
                return values.copy()
        return self.value(k)

    def preview(self, k: int, rows: int) -> np.ndarray:
        """rows × channels matrix: r(k) followed by the previewed r(k+1), ..."""
        return np.array([self.value(k)] + [self.assumed(k + j) for j in range(1, rows)])

    def series(self, steps: int) -> np.ndarray:
        return np.array([self.value(k) for k in range(steps)])


@dataclass
class ScenarioDefinition:
    """Fully parameterized experiment."""

    name: str
    description: str
    model: StateSpaceModel
    constraints: Polytope
    reference: ReferenceTrajectory
    steps: int
    governors: List[GovernorSpec]
    disturbed: Optional[DisturbedModel] = None
    seed: int = presets.DEFAULT_SEED
    default_N: Optional[int] = None
    default_horizons: Optional[List[int]] = None

    def resolve(self, spec: GovernorSpec) -> GovernorSpec:
        """Fill unset horizons from this GovernorSpec's own N, else from the scenario defaults."""
        N = spec.N if spec.N is not None else self.default_N
        if spec.variant == 'multi_prg':
            horizons = None if N is None else list(range(N + 1))
        elif spec.N is not None or self.default_horizons is None:
            horizons = None if N is None else [N] * self.model.n_inputs
        else:
            horizons = list(self.default_horizons)
        return spec.with_defaults(N, horizons)


@dataclass
class ScenarioResult:
    """Per-step records and summary metrics of one governed simulation."""

    scenario: str
    governor: str
    seed: int
    constraints: Polytope
    t: np.ndarray
    r: np.ndarray
    v: np.ndarray
    y: np.ndarray
    x: np.ndarray
    kappa: np.ndarray
    step_time_ns: np.ndarray
    extras: Dict[str, np.ndarray] = field(default_factory=dict)

    @property
    def steps(self) -> int:
        return self.t.size

    @property
    def violations(self) -> int:
        excess = self.y @ self.constraints.H.T - self.constraints.h
        return int(np.sum(np.any(excess > 1e-6, axis=1)))

    @property
    def tracking_gap(self) -> float:
        return float(np.sum(np.abs(self.r - self.v)))

    def summary(self) -> Dict:
        return {
            'scenario': self.scenario,
            'governor': self.governor,
            'seed': self.seed,
            'steps': self.steps,
            'violations': self.violations,
            'max_abs_y': np.max(np.abs(self.y), axis=0).tolist(),
            'tracking_gap': self.tracking_gap,
            'min_kappa': float(np.nanmin(self.kappa)) if np.any(~np.isnan(self.kappa)) else None,
            'step_time_mean_ns': float(np.mean(self.step_time_ns)),
            'step_time_max_ns': int(np.max(self.step_time_ns)),
        }


def one_link_model() -> StateSpaceModel:
    """Closed-loop one-link arm (ZOH plant, state feedback)."""
    plant = StateSpaceModel(presets.ONE_LINK['A'], presets.ONE_LINK['B'],
                            presets.ONE_LINK['C'], presets.ONE_LINK['D'])
    discrete = discretize_zoh(plant, presets.ONE_LINK['sample_time'])
    return close_state_feedback(discrete, presets.ONE_LINK['K'], presets.ONE_LINK['precomp'])


def two_link_model() -> StateSpaceModel:
    """Closed-loop two-link arm (ZOH plant, state feedback)."""
    plant = StateSpaceModel(presets.TWO_LINK['A'], presets.TWO_LINK['B'],
                            presets.TWO_LINK['C'], presets.TWO_LINK['D'])
    discrete = discretize_zoh(plant, presets.TWO_LINK['sample_time'])
    return close_state_feedback(discrete, presets.TWO_LINK['K'], presets.TWO_LINK['precomp'])


def one_link_disturbed(model: Optional[StateSpaceModel] = None) -> DisturbedModel:
    """
    Joint-torque disturbance entering like the command: B_w is the
    closed-loop input matrix B, D_w = 0.
    """
    model = model or one_link_model()
    B_w = model.B
    bound = presets.ONE_LINK_DISTURBANCE['bound']
    return DisturbedModel(model, B_w, np.zeros((1, 1)), Polytope.box([-bound], [bound]))


def canonical_scenarios() -> Dict[str, ScenarioDefinition]:
    """Named registry of the arm-robot experiments."""
    one_link = one_link_model()
    two_link = two_link_model()
    Ts = presets.ONE_LINK['sample_time']
    one_link_y = Polytope.symmetric_box(presets.ONE_LINK['y_bound'])
    two_link_y = Polytope.symmetric_box(presets.TWO_LINK['y_bound'])
    one_link_ref = ReferenceTrajectory(presets.ONE_LINK_REFERENCE, Ts)
    two_link_ref = ReferenceTrajectory(presets.TWO_LINK_REFERENCE, presets.TWO_LINK['sample_time'])
    N = presets.ONE_LINK['horizon']

    scenarios = [
        ScenarioDefinition(
            name='one_link',
            description='One-link arm, |θ| <= 45°, scalar vs preview vs multi-horizon vs command governor',
            model=one_link, constraints=one_link_y, reference=one_link_ref,
            steps=presets.ONE_LINK_STEPS,
            governors=[GovernorSpec(variant='srg'), GovernorSpec(variant='prg', N=N),
                       GovernorSpec(variant='multi_prg', horizons=presets.MULTI_N_HORIZONS),
                       GovernorSpec(variant='cg', N=N)],
            default_N=N),
        ScenarioDefinition(
            name='one_link_multi_n',
            description='One-link arm, two-horizon {0,100} vs dense {0..100} multi-horizon governor',
            model=one_link, constraints=one_link_y, reference=one_link_ref,
            steps=presets.ONE_LINK_STEPS,
            governors=[GovernorSpec(variant='multi_prg', horizons=presets.MULTI_N_SPARSE),
                       GovernorSpec(variant='multi_prg', horizons=presets.MULTI_N_DENSE)],
            default_N=100),
        ScenarioDefinition(
            name='one_link_disturbance',
            description='One-link arm with joint-torque disturbance in [-0.1, 0.1] and disturbance preview',
            model=one_link, constraints=one_link_y, reference=one_link_ref,
            steps=presets.DISTURBANCE_STEPS,
            governors=[GovernorSpec(variant='robust_srg')]
            + [GovernorSpec(variant='disturbance_prg', N=n) for n in presets.ONE_LINK_DISTURBANCE['horizons']],
            disturbed=one_link_disturbed(one_link),
            default_N=presets.ONE_LINK_DISTURBANCE['horizons'][0]),
        ScenarioDefinition(
            name='one_link_lambda',
            description='One-link arm, N=4, preview larger than the actual reference in a window',
            model=one_link, constraints=one_link_y,
            reference=ReferenceTrajectory(presets.LAMBDA_REFERENCE, Ts, presets.LAMBDA_CORRUPTION),
            steps=presets.LAMBDA_STEPS,
            governors=[GovernorSpec(variant='prg', N=4),
                       GovernorSpec(variant='lambda_prg', lambdas=presets.LAMBDA_PRESET_VALUES)],
            default_N=4),
        ScenarioDefinition(
            name='two_link',
            description='Two-link arm, |θ1|,|θ2| <= 60°, single-κ lifted governor',
            model=two_link, constraints=two_link_y, reference=two_link_ref,
            steps=presets.TWO_LINK_STEPS,
            governors=[GovernorSpec(variant='multi_input_prg', horizons=presets.TWO_LINK['horizons'])],
            default_horizons=presets.TWO_LINK['horizons']),
        ScenarioDefinition(
            name='two_link_drg',
            description='Two-link arm, decoupled per-channel preview governors',
            model=two_link, constraints=two_link_y, reference=two_link_ref,
            steps=presets.TWO_LINK_STEPS,
            governors=[GovernorSpec(variant='multi_input_prg', horizons=presets.TWO_LINK['horizons']),
                       GovernorSpec(variant='drg_prg', horizons=presets.TWO_LINK['horizons'])],
            default_horizons=presets.TWO_LINK['horizons']),
    ]
    return {scenario.name: scenario for scenario in scenarios}


def scenario_from_document(document: ScenarioDocument, name: str = 'custom') -> ScenarioDefinition:
    """ScenarioDefinition for a user-defined scenario document."""
    loaded = model_from_document(document.model)
    disturbed = loaded if isinstance(loaded, DisturbedModel) else None
    model = disturbed.base if disturbed is not None else loaded
    if not model.is_discrete:
        raise ConfigurationError("Scenario model must carry a sample_time (discrete model)")
    if len(document.y_min) != model.n_outputs:
        raise ConfigurationError(f"Scenario gives {len(document.y_min)} output bounds for "
                                 f"{model.n_outputs} outputs")
    reference = ReferenceTrajectory(document.reference, model.sample_time, document.corruptions)
    if reference.channels != model.n_inputs:
        raise ConfigurationError(f"Reference has {reference.channels} channels, model has "
                                 f"{model.n_inputs} inputs")
    return ScenarioDefinition(
        name=document.name or name, description=document.description, model=model,
        constraints=Polytope.box(document.y_min, document.y_max), reference=reference,
        steps=document.steps, governors=list(document.governors) or [GovernorSpec(variant='srg')],
        disturbed=disturbed, seed=document.seed, default_N=document.default_N)


def get_scenario(name: str) -> ScenarioDefinition:
    """Registry scenario by name, or a scenario document when name is a JSON file path."""
    if name.endswith('.json') or Path(name).is_file():
        return scenario_from_document(load_scenario_document(name), Path(name).stem)
    scenarios = canonical_scenarios()
    if name not in scenarios:
        raise ConfigurationError(f"Unknown scenario '{name}'. Known scenarios: {', '.join(sorted(scenarios))}")
    return scenarios[name]


def _direct_provider(key: Dict, builder: Callable[[], AdmissibleSet]) -> AdmissibleSet:
    return builder()


def _model_key(model: StateSpaceModel) -> Dict:
    return {'A': model.A.tolist(), 'B': model.B.tolist(), 'C': model.C.tolist(),
            'D': model.D.tolist(), 'sample_time': model.sample_time}


def _constraint_key(Y: Polytope) -> Dict:
    return {'H': Y.H.tolist(), 'h': Y.h.tolist()}


def _channel_constraints(Y: Polytope, channel: int) -> Polytope:
    """Rows of Y that involve output `channel` only, as a one-dimensional polytope."""
    others = np.delete(Y.H, channel, axis=1)
    rows = np.flatnonzero(np.all(others == 0.0, axis=1) & (Y.H[:, channel] != 0.0))
    coupled = np.flatnonzero(np.any(others != 0.0, axis=1) & (Y.H[:, channel] != 0.0))
    if coupled.size or rows.size == 0:
        raise ConfigurationError("Decoupled governors need output constraints separable per channel")
    return Polytope(Y.H[rows][:, [channel]], Y.h[rows])


def lambda_matrix(spec: GovernorSpec) -> PreviewAMatrix:
    if spec.mixing_matrix is not None:
        return PreviewAMatrix.from_matrix(spec.mixing_matrix)
    return PreviewAMatrix.lambda_shift(spec.lambdas)


def make_governor(model: StateSpaceModel, constraints: Polytope, spec: GovernorSpec,
                  disturbed: Optional[DisturbedModel] = None,
                  set_provider: Optional[SetProvider] = None,
                  t_max: Optional[int] = None):
    """Build the admissible set(s) for spec (through set_provider) and the governor object."""
    missing = spec.missing()
    if missing:
        raise ConfigurationError(f"Governor '{spec.variant}' is missing parameters: {', '.join(missing)}")
    provide = set_provider or _direct_provider
    limits = {} if t_max is None else {'t_max': t_max}
    eps = spec.epsilon
    base_key = {'model': _model_key(model), 'constraints': _constraint_key(constraints), 'epsilon': eps}

    def lifted_set(lifted: StateSpaceModel, a_bar: PreviewAMatrix) -> AdmissibleSet:
        key = dict(base_key, kind='lifted', a_bar=a_bar.matrix.tolist(), horizons=list(a_bar.horizons))
        return provide(key, lambda: build_lifted_mas(lifted, a_bar, constraints, eps, **limits))

    variant = spec.variant
    if variant == 'srg':
        aset = provide(dict(base_key, kind='standard'), lambda: build_mas(model, constraints, eps, **limits))
        return ScalarReferenceGovernor(aset, spec.exact_lp)

    if variant in ('prg', 'cg') and model.n_inputs == 1:
        a_bar = PreviewAMatrix.delay(spec.N)
        aset = lifted_set(lift_input(model, spec.N), a_bar)
        if variant == 'cg':
            return CommandGovernor(aset, a_bar, spec.Q)
        return PreviewReferenceGovernor(aset, a_bar, spec.exact_lp)

    if variant in ('prg', 'multi_input_prg', 'cg'):
        horizons = spec.horizons or [spec.N] * model.n_inputs
        a_bar = PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(N) for N in horizons])
        aset = lifted_set(lift_input_multi(model, horizons), a_bar)
        if variant == 'cg':
            return CommandGovernor(aset, a_bar, spec.Q)
        return MultiInputPreviewGovernor(aset, a_bar, spec.exact_lp)

    if variant == 'multi_prg':
        N_q = spec.horizons[-1]
        aset = lifted_set(lift_input(model, N_q), PreviewAMatrix.delay(N_q))
        return MultiHorizonGovernor(aset, spec.horizons, spec.exact_lp)

    if variant == 'lambda_prg':
        a_bar = lambda_matrix(spec)
        aset = lifted_set(lift_input(model, a_bar.horizon), a_bar)
        return LambdaPreviewGovernor(aset, a_bar, spec.exact_lp)

    if variant in ('disturbance_prg', 'robust_srg'):
        if disturbed is None:
            raise ConfigurationError(f"Governor '{variant}' needs a disturbed model")
        W = disturbed.disturbance_set
        dist_key = dict(base_key, B_w=disturbed.B_w.tolist(), D_w=disturbed.D_w.tolist(),
                        W=W.vertices.tolist())
        if variant == 'robust_srg':
            aset = provide(dict(dist_key, kind='robust_standard'),
                           lambda: build_robust_mas(disturbed, constraints, eps, **limits))
        else:
            aset = provide(dict(dist_key, kind='disturbance_preview', N=spec.N),
                           lambda: build_disturbance_preview_mas(disturbed, spec.N, constraints, eps, **limits))
        return DisturbancePreviewGovernor(aset, W, spec.exact_lp)

    if variant == 'drg_prg':
        plant_tf = tf_from_ss(model)
        F, F_inv, W = DecoupledPreviewGovernor.decouple(plant_tf)
        children, channel_models = [], []
        for i, N in enumerate(spec.horizons):
            channel = DecoupledPreviewGovernor.channel_model(W.entry(i, i), model.sample_time)
            Y_i = _channel_constraints(constraints, i)
            a_bar = PreviewAMatrix.delay(N)
            key = {'model': _model_key(channel), 'constraints': _constraint_key(Y_i), 'epsilon': eps,
                   'kind': 'lifted', 'a_bar': a_bar.matrix.tolist(), 'horizons': [N]}
            lifted = lift_input(channel, N)
            aset = provide(key, lambda lifted=lifted, a_bar=a_bar, Y_i=Y_i:
                           build_lifted_mas(lifted, a_bar, Y_i, eps, **limits))
            children.append(PreviewReferenceGovernor(aset, a_bar, spec.exact_lp))
            channel_models.append(channel)
        return DecoupledPreviewGovernor(plant_tf, children, channel_models, F, F_inv)

    raise ConfigurationError(f"Unknown governor variant '{variant}'")


def _disturbance_stream(disturbed: DisturbedModel, length: int, seed: int) -> np.ndarray:
    """Uniform samples over the bounding box of W from a seeded PCG64 generator."""
    rng = np.random.Generator(np.random.PCG64(seed))
    vertices = disturbed.disturbance_set.vertices
    return rng.uniform(vertices.min(axis=0), vertices.max(axis=0), size=(length, disturbed.n_disturbances))


def run_scenario(model: StateSpaceModel, governor, reference: ReferenceTrajectory,
                 constraints: Polytope, steps: int, disturbed: Optional[DisturbedModel] = None,
                 seed: int = presets.DEFAULT_SEED, x0=None, label: Optional[str] = None,
                 scenario: str = 'custom', check_feasibility: Optional[bool] = None) -> ScenarioResult:
    """
    Simulate the governed closed loop for `steps` samples.

    Wall time is measured around the governor step only. In test mode the
    κ = 0 candidate is checked for admissibility before every step.
    """
    if check_feasibility is None:
        check_feasibility = os.getenv('ENV_MODE', 'test') == 'test'
    plant = disturbed if disturbed is not None else model
    x = np.zeros(model.n_states) if x0 is None else np.array(x0, dtype=float)
    rows = governor.preview_rows
    n_previewed = getattr(governor, 'n_previewed', 0)

    w = None
    if disturbed is not None:
        w = _disturbance_stream(disturbed, steps + n_previewed + 1, seed)

    def w_preview(k):
        return None if w is None or n_previewed == 0 else w[k:k + n_previewed]

    governor.initialize(x, reference.preview(0, rows), w_preview(0))

    records = {name: [] for name in ('t', 'r', 'v', 'y', 'x', 'kappa', 'step_time_ns')}
    extras: Dict[str, List[np.ndarray]] = {}
    for k in range(steps):
        r_preview = reference.preview(k, rows)
        preview_w = w_preview(k)
        if check_feasibility and not governor.is_recursively_feasible(x, preview_w):
            raise AssertionFailedError(f"Recursive feasibility lost at step {k} ({label or governor.variant})")

        started = time.perf_counter_ns()
        result = governor.step(x, r_preview, preview_w)
        elapsed = time.perf_counter_ns() - started

        x_next, y = step(plant, x, result.v, None if w is None else w[k])
        records['t'].append(k * reference.sample_time)
        records['r'].append(r_preview[0])
        records['v'].append(result.v)
        records['y'].append(y)
        records['x'].append(x)
        records['kappa'].append(result.kappa)
        records['step_time_ns'].append(elapsed)
        for name in ('kappas', 'u', 'r_filtered'):
            value = getattr(result, name)
            if value is not None:
                extras.setdefault(name, []).append(value)
        if result.i_star is not None:
            extras.setdefault('i_star', []).append(result.i_star)
        x = x_next

    outcome = ScenarioResult(
        scenario=scenario,
        governor=label or governor.variant,
        seed=seed,
        constraints=constraints,
        t=np.array(records['t']),
        r=np.array(records['r']).reshape(steps, -1),
        v=np.array(records['v']).reshape(steps, -1),
        y=np.array(records['y']).reshape(steps, -1),
        x=np.array(records['x']).reshape(steps, -1),
        kappa=np.array(records['kappa'], dtype=float),
        step_time_ns=np.array(records['step_time_ns'], dtype=np.int64),
        extras={name: np.array(values) for name, values in extras.items()},
    )
    logger.info(f"Scenario {scenario} / {outcome.governor}: violations={outcome.violations}, "
                f"tracking gap={outcome.tracking_gap:.4g}")
    return outcome


def simulate(definition: ScenarioDefinition, spec: GovernorSpec,
             set_provider: Optional[SetProvider] = None, seed: Optional[int] = None,
             governor=None) -> ScenarioResult:
    """Run one governor spec on a registry scenario."""
    spec = definition.resolve(spec)
    governor = governor or make_governor(definition.model, definition.constraints, spec,
                                         definition.disturbed, set_provider)
    return run_scenario(definition.model, governor, definition.reference, definition.constraints,
                        definition.steps, definition.disturbed,
                        definition.seed if seed is None else seed,
                        label=spec.label, scenario=definition.name)


def run_timing_comparison(definition: ScenarioDefinition, specs: Optional[Sequence[GovernorSpec]] = None,
                          repeats: int = 10, set_provider: Optional[SetProvider] = None,
                          warmup: int = 1) -> List[Dict]:
    """
    Per-governor mean and max step latency averaged over repeats.

    Sets are built before timing; warm-up runs are discarded.
    """
    if repeats < 1:
        raise ConfigurationError(f"repeats must be at least 1, got {repeats}")
    specs = list(specs) if specs else definition.governors
    table = []
    for spec in specs:
        spec = definition.resolve(spec)
        governor = make_governor(definition.model, definition.constraints, spec,
                                 definition.disturbed, set_provider)
        for _ in range(warmup):
            simulate(definition, spec, governor=governor)
        means, maxima = [], []
        for _ in range(repeats):
            result = simulate(definition, spec, governor=governor)
            means.append(float(np.mean(result.step_time_ns)))
            maxima.append(float(np.max(result.step_time_ns)))
        table.append({
            'governor': spec.label,
            'variant': spec.variant,
            'repeats': repeats,
            'mean_ns': float(np.mean(means)),
            'max_ns': float(np.mean(maxima)),
        })
        logger.info(f"Timing {spec.label}: mean {table[-1]['mean_ns']:.0f} ns, max {table[-1]['max_ns']:.0f} ns")
    return table
