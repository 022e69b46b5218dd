"""
Module for run-configuration and model exchange documents.
"""

import json
import logging
from pathlib import Path
from typing import List, Literal, Optional, Tuple, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from src.constants.models import DEFAULT_SEED
from src.constants.tolerances import DEFAULT_EPSILON, DEFAULT_ITER_MAX, DEFAULT_T_MAX
from .errors import ConfigurationError
from .polytope import Polytope
from .sysmod import DisturbedModel, StateSpaceModel

logger = logging.getLogger(__name__)

VARIANTS = ('srg', 'prg', 'multi_prg', 'disturbance_prg', 'robust_srg', 'lambda_prg',
            'multi_input_prg', 'drg_prg', 'cg')

Variant = Literal['srg', 'prg', 'multi_prg', 'disturbance_prg', 'robust_srg', 'lambda_prg',
                  'multi_input_prg', 'drg_prg', 'cg']

Matrix = List[List[float]]


class GovernorSpec(BaseModel):
    """Governor variant and its parameters."""

    model_config = ConfigDict(extra='forbid')

    variant: Variant
    N: Optional[int] = Field(default=None, ge=0)
    horizons: Optional[List[int]] = None
    lambdas: Optional[List[float]] = None
    mixing_matrix: Optional[Matrix] = None
    epsilon: float = Field(default=DEFAULT_EPSILON, gt=0.0, lt=1.0)
    Q: Optional[Matrix] = None
    exact_lp: bool = False

    @model_validator(mode='after')
    def check_parameters(self) -> 'GovernorSpec':
        if self.horizons is not None and any(N < 0 for N in self.horizons):
            raise ValueError("horizons must be non-negative")
        if self.variant == 'multi_prg' and self.horizons is not None:
            if list(self.horizons) != sorted(set(self.horizons)):
                raise ValueError("multi_prg horizons must be strictly increasing")
        if self.lambdas is not None and any(not 0.0 <= lam <= 1.0 for lam in self.lambdas):
            raise ValueError("λ values must lie in [0, 1]")
        return self

    def missing(self) -> List[str]:
        """Parameters the variant needs but this GovernorSpec does not carry."""
        needs = {
            'prg': ['N'],
            'cg': ['N'],
            'disturbance_prg': ['N'],
            'multi_prg': ['horizons'],
            'multi_input_prg': ['horizons'],
            'drg_prg': ['horizons'],
        }.get(self.variant, [])
        gaps = [name for name in needs if getattr(self, name) is None]
        if self.variant == 'lambda_prg' and self.lambdas is None and self.mixing_matrix is None:
            gaps.append('lambdas')
        return gaps

    def with_defaults(self, N: Optional[int] = None,
                      horizons: Optional[List[int]] = None) -> 'GovernorSpec':
        """Fill N / horizons from a scenario's defaults where unset."""
        updates = {}
        if self.N is None and N is not None:
            updates['N'] = N
        if self.horizons is None and horizons is not None:
            updates['horizons'] = list(horizons)
        return self.model_copy(update=updates) if updates else self

    @property
    def label(self) -> str:
        if self.variant in ('multi_prg', 'multi_input_prg', 'drg_prg') and self.horizons is not None:
            if self.variant == 'multi_prg' and len(self.horizons) > 3:
                return f"{self.variant}(N={self.horizons[0]}..{self.horizons[-1]},q={len(self.horizons)})"
            return f"{self.variant}(N={','.join(str(N) for N in self.horizons)})"
        if self.variant == 'lambda_prg':
            lambdas = self.lambdas or []
            return f"{self.variant}(λ={','.join(f'{lam:g}' for lam in lambdas) or 'matrix'})"
        if self.N is not None and self.variant not in ('srg', 'robust_srg'):
            return f"{self.variant}(N={self.N})"
        return self.variant


class RunConfig(BaseModel):
    """Run configuration document; command-line flags override its fields."""

    model_config = ConfigDict(extra='forbid')

    scenario: Optional[str] = None
    governors: List[GovernorSpec] = Field(default_factory=list)
    output_dir: Optional[str] = None
    seed: Optional[int] = None
    repeats: int = Field(default=10, ge=1)
    timing: bool = False
    t_max: int = Field(default=DEFAULT_T_MAX, ge=1)
    iter_max: int = Field(default=DEFAULT_ITER_MAX, ge=1)


class DisturbanceDocument(BaseModel):
    """Additive disturbance with box bounds lower <= w <= upper."""

    model_config = ConfigDict(extra='forbid')

    B_w: Matrix
    D_w: Matrix
    lower: List[float]
    upper: List[float]


class ModelDocument(BaseModel):
    """State-space model exchange document (row-major matrices)."""

    model_config = ConfigDict(extra='forbid')

    A: Matrix
    B: Matrix
    C: Matrix
    D: Matrix
    sample_time: Optional[float] = Field(default=None, gt=0.0)
    disturbance: Optional[DisturbanceDocument] = None


class ScenarioDocument(BaseModel):
    """User-defined scenario: a discrete model with box output bounds and a piecewise-constant reference."""

    model_config = ConfigDict(extra='forbid')

    name: Optional[str] = None
    description: str = ''
    model: ModelDocument
    y_min: List[float]
    y_max: List[float]
    reference: List[Tuple[float, List[float]]] = Field(min_length=1)
    corruptions: List[Tuple[float, float, List[float]]] = Field(default_factory=list)
    steps: int = Field(gt=0)
    governors: List[GovernorSpec] = Field(default_factory=list)
    seed: int = DEFAULT_SEED
    default_N: Optional[int] = Field(default=None, ge=0)

    @model_validator(mode='after')
    def check_bounds(self) -> 'ScenarioDocument':
        if len(self.y_min) != len(self.y_max):
            raise ValueError("y_min and y_max must have the same length")
        if any(lo > hi for lo, hi in zip(self.y_min, self.y_max)):
            raise ValueError("y_min must not exceed y_max")
        return self


def _read_json(path: Union[str, Path]) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigurationError(f"Configuration file not found: {path}")
    try:
        return json.loads(path.read_text())
    except json.JSONDecodeError as e:
        raise ConfigurationError(f"Invalid JSON in {path}: {str(e)}")


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Load and validate a run configuration document."""
    try:
        return RunConfig.model_validate(_read_json(path))
    except ValidationError as e:
        logger.error(f"Error validating run configuration {path}: {str(e)}")
        raise ConfigurationError(f"Invalid run configuration {path}: {str(e)}")


def _parse_list(text: Optional[str], cast) -> Optional[list]:
    if text is None:
        return None
    try:
        return [cast(item) for item in str(text).replace(' ', '').split(',') if item]
    except ValueError:
        raise ConfigurationError(f"Cannot parse list '{text}'")


def _flag_parameters(args) -> dict:
    """Governor parameters given by --n / --horizons / --lambda / --epsilon."""
    fields = {}
    if getattr(args, 'n', None) is not None:
        fields['N'] = args.n
    horizons = _parse_list(getattr(args, 'horizons', None), int)
    if horizons is not None:
        fields['horizons'] = horizons
    lambdas = _parse_list(getattr(args, 'lambdas', None), float)
    if lambdas is not None:
        fields['lambdas'] = lambdas
    if getattr(args, 'epsilon', None) is not None:
        fields['epsilon'] = args.epsilon
    return fields


def spec_from_args(variant: str, args, base: Optional[GovernorSpec] = None) -> GovernorSpec:
    """GovernorSpec for variant with the flag parameters applied over base."""
    fields = base.model_dump(exclude_none=True) if base is not None else {}
    fields.update(_flag_parameters(args))
    fields['variant'] = variant
    try:
        return GovernorSpec(**fields)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid governor parameters: {str(e)}")


def run_config_from_args(args) -> RunConfig:
    """Run configuration from --config (if given) with command-line flags applied on top."""
    config = load_run_config(args.config) if getattr(args, 'config', None) else RunConfig()
    updates = {}
    for flag, name in (('scenario', 'scenario'), ('seed', 'seed'), ('repeats', 'repeats'),
                       ('out', 'output_dir')):
        value = getattr(args, flag, None)
        if value is not None:
            updates[name] = value
    if getattr(args, 'timing', False):
        updates['timing'] = True

    variants = []
    if getattr(args, 'governor', None):
        variants = [args.governor]
    elif getattr(args, 'governors', None):
        variants = _parse_list(args.governors, str)
    unknown = [variant for variant in variants if variant not in VARIANTS]
    if unknown:
        raise ConfigurationError(f"Unknown governor variant(s) {unknown}. Known variants: {', '.join(VARIANTS)}")
    if variants:
        updates['governors'] = [spec_from_args(variant, args) for variant in variants]
    elif config.governors and _flag_parameters(args):
        updates['governors'] = [spec_from_args(spec.variant, args, spec) for spec in config.governors]

    try:
        return config.model_copy(update=updates)
    except ValidationError as e:
        raise ConfigurationError(f"Invalid run configuration: {str(e)}")


def model_from_document(document: ModelDocument) -> Union[StateSpaceModel, DisturbedModel]:
    model = StateSpaceModel(np.array(document.A, dtype=float), np.array(document.B, dtype=float),
                            np.array(document.C, dtype=float), np.array(document.D, dtype=float),
                            sample_time=document.sample_time)
    if document.disturbance is None:
        return model
    block = document.disturbance
    return DisturbedModel(model, np.array(block.B_w, dtype=float), np.array(block.D_w, dtype=float),
                          Polytope.box(block.lower, block.upper))


def load_model_document(path: Union[str, Path]) -> Union[StateSpaceModel, DisturbedModel]:
    """Load a model exchange document into a StateSpaceModel or DisturbedModel."""
    try:
        document = ModelDocument.model_validate(_read_json(path))
    except ValidationError as e:
        logger.error(f"Error validating model document {path}: {str(e)}")
        raise ConfigurationError(f"Invalid model document {path}: {str(e)}")
    return model_from_document(document)


def load_scenario_document(path: Union[str, Path]) -> ScenarioDocument:
    try:
        return ScenarioDocument.model_validate(_read_json(path))
    except ValidationError as e:
        logger.error(f"Error validating scenario document {path}: {str(e)}")
        raise ConfigurationError(f"Invalid scenario document {path}: {str(e)}")


def model_to_document(model: Union[StateSpaceModel, DisturbedModel]) -> dict:
    """Serialize a model to the exchange document (box disturbance sets only)."""
    base = model.base if isinstance(model, DisturbedModel) else model
    document = {
        'A': base.A.tolist(),
        'B': base.B.tolist(),
        'C': base.C.tolist(),
        'D': base.D.tolist(),
        'sample_time': base.sample_time,
        'disturbance': None,
    }
    if isinstance(model, DisturbedModel):
        vertices = model.disturbance_set.vertices
        document['disturbance'] = {
            'B_w': model.B_w.tolist(),
            'D_w': model.D_w.tolist(),
            'lower': vertices.min(axis=0).tolist(),
            'upper': vertices.max(axis=0).tolist(),
        }
    return ModelDocument.model_validate(document).model_dump()
