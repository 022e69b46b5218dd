"""
Module for the build-set command: offline construction and caching of admissible sets.
"""

import json
import logging
import os
from pathlib import Path
from typing import Dict, List, Optional, Tuple

import numpy as np

from .config import GovernorSpec, load_model_document, run_config_from_args
from .database import SetCache
from .errors import (ConfigurationError, InfeasibleRobustificationError,
                     NonTerminationError)
from .export import ResultExporter, slug
from .mas import AdmissibleSet, slice_boundary
from .polytope import Polytope
from .scenario import get_scenario, make_governor
from .sysmod import DisturbedModel

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO = 'one_link'


class SetBuilder:
    """Builds the admissible sets a governor needs, through the set cache."""

    def __init__(self, cache: SetCache, t_max: Optional[int] = None):
        """Initialize the builder."""
        self.cache = cache
        self.t_max = t_max
        self.built: List[AdmissibleSet] = []

    def _provide(self, inputs: Dict, builder) -> AdmissibleSet:
        aset = self.cache.provide(inputs, builder)
        self.built.append(aset)
        return aset

    def build(self, model, constraints: Polytope, spec: GovernorSpec,
              disturbed: Optional[DisturbedModel] = None) -> List[AdmissibleSet]:
        """Return the sets for spec (one per channel for decoupled governors)."""
        self.built = []
        try:
            make_governor(model, constraints, spec, disturbed, self._provide, self.t_max)
        except NonTerminationError as e:
            logger.error(f"Error building {spec.label} set: {str(e)}. "
                         f"Try a larger epsilon or t_max, or check observability of the constrained outputs")
            raise
        except InfeasibleRobustificationError as e:
            logger.error(f"Error building {spec.label} set: {str(e)}. "
                         f"Shrink the disturbance bounds or relax the output constraints")
            raise
        return list(self.built)


def _model_source(args) -> Tuple:
    """(model, constraints, disturbed, name, scenario definition) from --model or --scenario."""
    model_path = getattr(args, 'model', None)
    if model_path:
        loaded = load_model_document(model_path)
        disturbed = loaded if isinstance(loaded, DisturbedModel) else None
        model = loaded.base if disturbed is not None else loaded
        if not model.is_discrete:
            raise ConfigurationError("Model document must carry a sample_time (discrete model)")
        if getattr(args, 'y_min', None) is None or getattr(args, 'y_max', None) is None:
            raise ConfigurationError("--model needs --y-min and --y-max output bounds")
        constraints = Polytope.box(args.y_min, args.y_max)
        return model, constraints, disturbed, Path(model_path).stem, None

    scenario_name = getattr(args, 'scenario', None) or DEFAULT_SCENARIO
    definition = get_scenario(scenario_name)
    return definition.model, definition.constraints, definition.disturbed, definition.name, definition


def handle_build_set(args):
    """Handle the build-set command from the CLI."""
    try:
        config = run_config_from_args(args)
        model, constraints, disturbed, name, definition = _model_source(args)

        specs = config.governors
        if not specs:
            specs = definition.governors if definition is not None else [GovernorSpec(variant='srg')]
        if definition is not None:
            specs = [definition.resolve(spec) for spec in specs]

        output_dir = config.output_dir or os.path.join(os.getenv('PRG_OUTPUT_DIR', 'data/results'), 'sets')
        exporter = ResultExporter()
        with SetCache() as cache:
            builder = SetBuilder(cache, config.t_max)
            for spec in specs:
                sets = builder.build(model, constraints, spec, disturbed)
                for index, aset in enumerate(sets):
                    suffix = f'_ch{index + 1}' if len(sets) > 1 else ''
                    path = Path(output_dir) / f'{name}_{slug(spec.label)}{suffix}.json'
                    path.parent.mkdir(parents=True, exist_ok=True)
                    path.write_text(json.dumps(aset.to_document()), encoding='utf-8')
                    logger.info(f"{spec.label}{suffix}: N={aset.horizon}, t*={aset.t_star}, "
                                f"rows={aset.n_rows} -> {path}")

                    if getattr(args, 'slice', False) and aset.n_commands >= 2 and aset.H_w is None:
                        points = slice_boundary(aset, np.zeros(aset.n_states))
                        exporter.export_slice(points, str(Path(output_dir) / f'{name}_{slug(spec.label)}{suffix}_slice.csv'))
            logger.info(f"Set cache: {cache.hits} hits, {cache.misses} misses")

    except Exception as e:
        logger.error(f"Failed to execute build-set command: {str(e)}")
        raise
