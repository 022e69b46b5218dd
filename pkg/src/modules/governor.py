"""
Module for the online reference governors.

Every governor keeps a lifted command v_N and, at each step, moves it from
Ā·v_N toward the lifted reference by the largest κ in [0, 1] that keeps
(x, v_N) inside its admissible set.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from src.constants.tolerances import TOLERANCES
from .errors import (ConfigurationError, GovernorInitializationError,
                     InputValidationError)
from .mas import AdmissibleSet, PreviewAMatrix
from .numerics import LpProblem, QpProblem, as_matrix, as_vector, solve_lp, solve_qp
from .polytope import Polytope
from .sysmod import RationalTF, StateSpaceModel, build_decoupler, realize_tf

logger = logging.getLogger(__name__)

SRG = 'srg'
PRG = 'prg'
MULTI_PRG = 'multi_prg'
DISTURBANCE_PRG = 'disturbance_prg'
ROBUST_SRG = 'robust_srg'
LAMBDA_PRG = 'lambda_prg'
MULTI_INPUT_PRG = 'multi_input_prg'
DRG_PRG = 'drg_prg'
CG = 'cg'


def explicit_kappa(a: np.ndarray, b: np.ndarray) -> float:
    """
    Largest κ in [0, 1] with a·κ <= b, by one pass over the rows.

    Any b(i) < 0 forces κ = 0; rows with a(i) <= 0 never bind.
    """
    if np.any(b < -TOLERANCES.feasibility):
        return 0.0
    binding = a > TOLERANCES.kappa_division
    if not np.any(binding):
        return 1.0
    kappa = min(1.0, float(np.min(b[binding] / a[binding])))
    return max(kappa, 0.0)


def lp_kappa(a: np.ndarray, b: np.ndarray) -> float:
    """Same κ as explicit_kappa, obtained from the LP max κ s.t. a·κ <= b, 0 <= κ <= 1."""
    outcome = solve_lp(LpProblem(np.ones(1), np.asarray(a, dtype=float).reshape(-1, 1), b,
                                 np.zeros(1), np.ones(1)))
    return float(outcome.x[0]) if outcome.is_optimal else 0.0


def multi_n_padding(N_i: int, N_q: int) -> np.ndarray:
    """
    Projection M_i keeping the first N_i+1 entries of a horizon-N_q command
    and repeating entry N_i beyond them.
    """
    if not 0 <= N_i <= N_q:
        raise ConfigurationError(f"Need 0 <= N_i <= N_q, got N_i={N_i}, N_q={N_q}")
    M = np.zeros((N_q + 1, N_q + 1))
    M[:N_i + 1, :N_i + 1] = np.eye(N_i + 1)
    M[N_i + 1:, N_i] = 1.0
    return M


@dataclass(frozen=True)
class StepInput:
    """Measured state, reference preview rows (time × channel) and optional disturbance preview."""

    x: np.ndarray
    r_preview: np.ndarray
    w_preview: Optional[np.ndarray] = None

    @classmethod
    def build(cls, x, r_preview, w_preview=None, n_states: Optional[int] = None,
              channels: int = 1, rows: int = 1) -> 'StepInput':
        try:
            x = as_vector(x, 'x', length=n_states)
        except ConfigurationError as e:
            raise InputValidationError(str(e))
        r = np.array(r_preview, dtype=float)
        if r.ndim == 0:
            r = r.reshape(1, 1)
        elif r.ndim == 1:
            r = r.reshape(-1, 1) if channels == 1 else r.reshape(1, -1)
        if r.shape[1] != channels:
            raise InputValidationError(f"Reference preview needs {channels} channels, got {r.shape[1]}")
        if r.shape[0] < rows:
            raise InputValidationError(f"Reference preview needs {rows} samples, got {r.shape[0]}")
        if not np.all(np.isfinite(r)):
            raise InputValidationError("Reference preview entries must be finite")
        if w_preview is not None:
            w_preview = np.array(w_preview, dtype=float)
            if not np.all(np.isfinite(w_preview)):
                raise InputValidationError("Disturbance preview entries must be finite")
        return cls(x, r, w_preview)


@dataclass(frozen=True)
class StepResult:
    """Outcome of one governor step."""

    v: np.ndarray
    kappa: float
    v_N: np.ndarray
    kappas: Optional[np.ndarray] = None
    i_star: Optional[int] = None
    u: Optional[np.ndarray] = None
    r_filtered: Optional[np.ndarray] = None


@dataclass
class GovernorState:
    """Mutable runtime state of a governor."""

    v_N: np.ndarray
    a_bar: PreviewAMatrix
    admissible_set: AdmissibleSet
    variant: str
    horizons: Tuple[int, ...] = ()
    paddings: List[np.ndarray] = field(default_factory=list)
    filter_states: Dict[str, np.ndarray] = field(default_factory=dict)
    channel_states: List[np.ndarray] = field(default_factory=list)


class PreviewReferenceGovernor:
    """Preview reference governor with the explicit κ pass."""

    variant = PRG

    def __init__(self, admissible_set: AdmissibleSet, a_bar: PreviewAMatrix,
                 exact_lp: bool = False):
        if admissible_set.n_commands != a_bar.size:
            raise ConfigurationError(
                f"Admissible set has {admissible_set.n_commands} command entries, Ā has {a_bar.size}")
        self.admissible_set = admissible_set
        self.a_bar = a_bar
        self.kappa_rule = lp_kappa if exact_lp else explicit_kappa
        self.state: Optional[GovernorState] = None

    @property
    def channels(self) -> int:
        return len(self.a_bar.horizons)

    @property
    def preview_rows(self) -> int:
        """Reference samples needed per step (current value plus preview)."""
        return self.a_bar.horizon + 1

    @property
    def v_N(self) -> np.ndarray:
        self._require_initialized()
        return self.state.v_N

    def _require_initialized(self):
        if self.state is None:
            raise GovernorInitializationError(f"{self.variant} governor used before initialize()")

    def _inputs(self, x, r_preview, w_preview=None) -> StepInput:
        return StepInput.build(x, r_preview, w_preview, self.admissible_set.n_states,
                               self.channels, 1)

    def lift_reference(self, r_preview: np.ndarray) -> np.ndarray:
        """Stack channel j's first N_j+1 samples; short previews hold their last sample."""
        parts = []
        for j, N in enumerate(self.a_bar.horizons):
            column = r_preview[:, j]
            if column.size < N + 1:
                column = np.concatenate([column, np.full(N + 1 - column.size, column[-1])])
            parts.append(column[:N + 1])
        return np.concatenate(parts)

    def constant_command(self, values: np.ndarray) -> np.ndarray:
        """Lifted command holding values[j] over channel j's whole horizon."""
        return np.concatenate([np.full(N + 1, values[j]) for j, N in enumerate(self.a_bar.horizons)])

    def applied(self, v_N: np.ndarray) -> np.ndarray:
        return v_N[list(self.a_bar.offsets)]

    def _membership_extra(self, inputs: StepInput) -> Optional[np.ndarray]:
        return None

    def initialize(self, x, r_preview, w_preview=None) -> GovernorState:
        """
        Start from the constant command at the first reference sample if
        admissible, else from rest; refuse to start otherwise.
        """
        inputs = self._inputs(x, r_preview, w_preview)
        extra = self._membership_extra(inputs)
        candidates = [self.constant_command(inputs.r_preview[0]), np.zeros(self.a_bar.size)]
        for candidate in candidates:
            if self.admissible_set.contains(inputs.x, candidate, extra):
                self.state = self._new_state(candidate)
                logger.debug(f"Initialized {self.variant} governor at v={self.applied(candidate).tolist()}")
                return self.state
        raise GovernorInitializationError(
            f"{self.variant} governor cannot start: initial state is not admissible "
            f"(worst margin {self.admissible_set.margin(inputs.x, candidates[-1], extra).min():.3g})")

    def _new_state(self, v_N: np.ndarray) -> GovernorState:
        return GovernorState(v_N=v_N.copy(), a_bar=self.a_bar, admissible_set=self.admissible_set,
                             variant=self.variant, horizons=self.a_bar.horizons)

    def _kappa_terms(self, x: np.ndarray, base: np.ndarray, direction: np.ndarray,
                     extra: Optional[np.ndarray]) -> Tuple[np.ndarray, np.ndarray]:
        """a = H_v·direction and b = margin of the κ = 0 candidate."""
        aset = self.admissible_set
        return aset.H_v @ direction, aset.margin(x, base, extra)

    def step(self, x, r_preview, w_preview=None) -> StepResult:
        self._require_initialized()
        inputs = self._inputs(x, r_preview, w_preview)
        extra = self._membership_extra(inputs)
        base = self.a_bar.matrix @ self.state.v_N
        direction = self.lift_reference(inputs.r_preview) - base
        a, b = self._kappa_terms(inputs.x, base, direction, extra)
        kappa = self.kappa_rule(a, b)
        self.state.v_N = base + kappa * direction
        return StepResult(v=self.applied(self.state.v_N), kappa=kappa, v_N=self.state.v_N.copy())

    def is_recursively_feasible(self, x, w_preview=None) -> bool:
        """Whether the κ = 0 update Ā·v_N is admissible at x."""
        self._require_initialized()
        inputs = StepInput(as_vector(x, 'x'), np.zeros((1, self.channels)), w_preview)
        base = self.a_bar.matrix @ self.state.v_N
        return self.admissible_set.contains(inputs.x, base, self._membership_extra(inputs),
                                            tol=TOLERANCES.constraint_check)


class ScalarReferenceGovernor(PreviewReferenceGovernor):
    """Reference governor with constant commands (no preview)."""

    variant = SRG

    def __init__(self, admissible_set: AdmissibleSet, exact_lp: bool = False):
        channels = admissible_set.n_commands
        a_bar = PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(0)] * channels)
        super().__init__(admissible_set, a_bar, exact_lp)


class LambdaPreviewGovernor(PreviewReferenceGovernor):
    """Preview governor whose Ā mixes stale preview entries with λ weights."""

    variant = LAMBDA_PRG

    def __init__(self, admissible_set: AdmissibleSet, a_bar: PreviewAMatrix, exact_lp: bool = False):
        if a_bar.kind != 'lambda':
            raise ConfigurationError("LambdaPreviewGovernor needs a λ-variant Ā")
        super().__init__(admissible_set, a_bar, exact_lp)


class MultiInputPreviewGovernor(PreviewReferenceGovernor):
    """One κ over the block-diagonal lifted command of several channels."""

    variant = MULTI_INPUT_PRG


class MultiHorizonGovernor(PreviewReferenceGovernor):
    """
    Runs one preview governor per horizon N_1 < ... < N_q on the single
    horizon-N_q set and fuses them by the largest κ (ties: longest horizon).
    """

    variant = MULTI_PRG

    def __init__(self, admissible_set: AdmissibleSet, horizons: Sequence[int], exact_lp: bool = False):
        horizons = tuple(int(N) for N in horizons)
        if not horizons or list(horizons) != sorted(set(horizons)) or horizons[0] < 0:
            raise ConfigurationError(f"Horizons must be strictly increasing and non-negative, got {horizons}")
        super().__init__(admissible_set, PreviewAMatrix.delay(horizons[-1]), exact_lp)
        self.horizons = horizons
        self.paddings = [multi_n_padding(N, horizons[-1]) for N in horizons]

    def _new_state(self, v_N: np.ndarray) -> GovernorState:
        state = super()._new_state(v_N)
        state.horizons = self.horizons
        state.paddings = self.paddings
        return state

    def step(self, x, r_preview, w_preview=None) -> StepResult:
        self._require_initialized()
        inputs = self._inputs(x, r_preview)
        base = self.a_bar.matrix @ self.state.v_N
        target = self.lift_reference(inputs.r_preview)

        kappas = np.zeros(len(self.horizons))
        candidates = []
        for i, M in enumerate(self.paddings):
            padded_base = M @ base
            direction = M @ (target - base)
            a, b = self._kappa_terms(inputs.x, padded_base, direction, None)
            kappas[i] = self.kappa_rule(a, b)
            candidates.append(padded_base + kappas[i] * direction)

        best = float(kappas.max())
        i_star = int(np.flatnonzero(kappas == best)[-1])
        self.state.v_N = candidates[i_star]
        return StepResult(v=self.applied(self.state.v_N), kappa=best, v_N=self.state.v_N.copy(),
                          kappas=kappas, i_star=i_star)


class DisturbancePreviewGovernor(PreviewReferenceGovernor):
    """
    Constant-command governor on a robust set whose extra columns take the
    previewed disturbances w_0..w_N; with no previewed samples it is the
    robust scalar governor.
    """

    variant = DISTURBANCE_PRG

    def __init__(self, admissible_set: AdmissibleSet, disturbance_set: Polytope, exact_lp: bool = False):
        if admissible_set.H_w is None:
            raise ConfigurationError("Disturbance preview governor needs a set with disturbance columns")
        channels = admissible_set.n_commands
        super().__init__(admissible_set, PreviewAMatrix.block_diagonal([PreviewAMatrix.delay(0)] * channels),
                         exact_lp)
        self.disturbance_set = disturbance_set
        self.n_previewed = admissible_set.H_w.shape[1] // disturbance_set.dimension
        if self.n_previewed == 0:
            self.variant = ROBUST_SRG

    def _membership_extra(self, inputs: StepInput) -> np.ndarray:
        n_w = self.disturbance_set.dimension
        if self.n_previewed == 0:
            return np.zeros(0)
        if inputs.w_preview is None:
            raise InputValidationError(f"Disturbance preview of {self.n_previewed} samples is required")
        w = np.array(inputs.w_preview, dtype=float).reshape(-1, n_w)
        if w.shape[0] < self.n_previewed:
            raise InputValidationError(
                f"Disturbance preview needs {self.n_previewed} samples, got {w.shape[0]}")
        w = w[:self.n_previewed]
        for k, sample in enumerate(w):
            inside, _ = self.disturbance_set.contains(sample)
            if not inside:
                raise InputValidationError(f"Previewed disturbance w[{k}]={sample.tolist()} lies outside W")
        return w.reshape(-1)


class CommandGovernor(PreviewReferenceGovernor):
    """
    Command governor baseline: v_N minimizes (r_N - v_N)ᵀQ(r_N - v_N) over the
    admissible slice at x.
    """

    variant = CG

    def __init__(self, admissible_set: AdmissibleSet, a_bar: PreviewAMatrix, Q=None):
        super().__init__(admissible_set, a_bar)
        self.Q = np.eye(a_bar.size) if Q is None else as_matrix(Q, 'Q', rows=a_bar.size, cols=a_bar.size)

    def step(self, x, r_preview, w_preview=None) -> StepResult:
        self._require_initialized()
        inputs = self._inputs(x, r_preview)
        target = self.lift_reference(inputs.r_preview)
        aset = self.admissible_set
        outcome = solve_qp(QpProblem(self.Q, -self.Q @ target, aset.H_v, aset.h - aset.H_x @ inputs.x))
        if outcome.is_optimal:
            self.state.v_N = outcome.x
        else:
            logger.warning("Command governor QP infeasible at current state; holding previous command")
            self.state.v_N = self.a_bar.matrix @ self.state.v_N
        return StepResult(v=self.applied(self.state.v_N), kappa=float('nan'), v_N=self.state.v_N.copy())


class _FilterRunner:
    """Realized transfer matrix stepped sample by sample."""

    def __init__(self, model: StateSpaceModel):
        self.model = model
        self.x = np.zeros(model.n_states)

    def output(self, u: np.ndarray, x: Optional[np.ndarray] = None) -> np.ndarray:
        x = self.x if x is None else x
        return self.model.C @ x + self.model.D @ u

    def advance(self, u: np.ndarray, x: Optional[np.ndarray] = None) -> np.ndarray:
        x = self.x if x is None else x
        return self.model.A @ x + self.model.B @ u

    def commit(self, u: np.ndarray) -> np.ndarray:
        y = self.output(u)
        self.x = self.advance(u)
        return y

    def preview(self, inputs: np.ndarray) -> np.ndarray:
        """Outputs over an input sequence from the current state, without committing."""
        x = self.x.copy()
        outputs = []
        for u in inputs:
            outputs.append(self.output(u, x))
            x = self.advance(u, x)
        return np.array(outputs)


class DecoupledPreviewGovernor:
    """
    Decoupled governor: references pass through F⁻¹, each channel runs its
    own preview governor against the diagonal entry W_ii, and the channel
    commands pass through F to give the plant commands.
    """

    variant = DRG_PRG

    def __init__(self, plant_tf: RationalTF, channel_governors: Sequence[PreviewReferenceGovernor],
                 channel_models: Sequence[StateSpaceModel], F: RationalTF, F_inv: RationalTF):
        m = plant_tf.shape[0]
        if len(channel_governors) != m or len(channel_models) != m:
            raise ConfigurationError(f"Need one channel governor and model per channel ({m})")
        self.plant_tf = plant_tf
        self.children = list(channel_governors)
        self.channel_models = list(channel_models)
        self.F = F
        self.F_inv = F_inv
        self.f_filter = _FilterRunner(realize_tf(F))
        self.f_inv_filter = _FilterRunner(realize_tf(F_inv))
        self.channel_states = [np.zeros(model.n_states) for model in self.channel_models]
        self.state: Optional[GovernorState] = None

    @staticmethod
    def channel_model(entry: Tuple[np.ndarray, np.ndarray], sample_time: float) -> StateSpaceModel:
        """Minimal realization of one diagonal entry W_ii."""
        W_ii = RationalTF([[entry[0]]], [[entry[1]]], sample_time).minimal()
        return realize_tf(W_ii)

    @staticmethod
    def decouple(plant_tf: RationalTF):
        """(F, F⁻¹, W) of the plant transfer matrix."""
        return build_decoupler(plant_tf)

    @property
    def channels(self) -> int:
        return len(self.children)

    @property
    def preview_rows(self) -> int:
        return max(child.preview_rows for child in self.children)

    def _filtered_preview(self, r_preview: np.ndarray) -> np.ndarray:
        rows = max(self.preview_rows, r_preview.shape[0])
        if r_preview.shape[0] < rows:
            r_preview = np.vstack([r_preview, np.repeat(r_preview[-1:], rows - r_preview.shape[0], axis=0)])
        return self.f_inv_filter.preview(r_preview)

    def initialize(self, x, r_preview, w_preview=None) -> GovernorState:
        inputs = StepInput.build(x, r_preview, None, None, self.channels, 1)
        self.f_filter.x = np.zeros(self.f_filter.model.n_states)
        self.f_inv_filter.x = np.zeros(self.f_inv_filter.model.n_states)
        self.channel_states = [np.zeros(model.n_states) for model in self.channel_models]
        filtered = self._filtered_preview(inputs.r_preview)
        for i, child in enumerate(self.children):
            child.initialize(self.channel_states[i], filtered[:, i:i + 1])
        self.state = GovernorState(
            v_N=np.concatenate([child.state.v_N for child in self.children]),
            a_bar=PreviewAMatrix.block_diagonal([child.a_bar for child in self.children]),
            admissible_set=self.children[0].admissible_set,
            variant=self.variant,
            horizons=tuple(child.a_bar.horizon for child in self.children),
            filter_states={'F': self.f_filter.x, 'F_inv': self.f_inv_filter.x},
            channel_states=self.channel_states,
        )
        return self.state

    def step(self, x, r_preview, w_preview=None) -> StepResult:
        """Channel states are simulated internally; x is the plant state and is not used."""
        if self.state is None:
            raise GovernorInitializationError("drg_prg governor used before initialize()")
        inputs = StepInput.build(x, r_preview, None, None, self.channels, 1)
        filtered = self._filtered_preview(inputs.r_preview)
        self.f_inv_filter.commit(inputs.r_preview[0])

        u = np.zeros(self.channels)
        kappas = np.zeros(self.channels)
        for i, child in enumerate(self.children):
            result = child.step(self.channel_states[i], filtered[:, i:i + 1])
            u[i] = result.v[0]
            kappas[i] = result.kappa
            model = self.channel_models[i]
            self.channel_states[i] = model.A @ self.channel_states[i] + model.B[:, 0] * u[i]

        v = self.f_filter.commit(u)
        self.state.v_N = np.concatenate([child.state.v_N for child in self.children])
        self.state.filter_states = {'F': self.f_filter.x, 'F_inv': self.f_inv_filter.x}
        return StepResult(v=v, kappa=float(kappas.min()), v_N=self.state.v_N.copy(), kappas=kappas,
                          u=u, r_filtered=filtered[0].copy())

    def is_recursively_feasible(self, x, w_preview=None) -> bool:
        return all(child.is_recursively_feasible(self.channel_states[i])
                   for i, child in enumerate(self.children))
