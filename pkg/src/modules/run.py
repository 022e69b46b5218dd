"""
Module for the run and list-scenarios commands.
"""

import logging
from typing import List, Optional

from .config import run_config_from_args
from .database import SetCache
from .export import ResultExporter, default_output_dir
from .scenario import ScenarioResult, canonical_scenarios, get_scenario, simulate

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO = 'one_link'


class ScenarioRunner:
    """Runs governor specs on a registry scenario with cached sets."""

    def __init__(self, cache: SetCache):
        """Initialize the runner."""
        self.cache = cache

    def run(self, scenario: str, specs=None, seed: Optional[int] = None) -> List[ScenarioResult]:
        definition = get_scenario(scenario)
        results = []
        for spec in specs or definition.governors:
            try:
                results.append(simulate(definition, spec, self.cache.provide, seed))
            except Exception as e:
                logger.error(f"Error running {spec.variant} on {scenario}: {str(e)}")
                raise
        return results


def handle_run(args):
    """Handle the run command from the CLI."""
    try:
        config = run_config_from_args(args)
        scenario = config.scenario or DEFAULT_SCENARIO
        with SetCache() as cache:
            results = ScenarioRunner(cache).run(scenario, config.governors, config.seed)

        output_dir = config.output_dir or default_output_dir(results[0].scenario if results else scenario)
        ResultExporter(timing=config.timing).export(results, output_dir)

        for result in results:
            summary = result.summary()
            logger.info(f"{summary['governor']}: violations={summary['violations']}, "
                        f"max|y|={summary['max_abs_y']}, tracking gap={summary['tracking_gap']:.4g}")
        logger.info(f"Run completed successfully; results in {output_dir}")
        return results

    except Exception as e:
        logger.error(f"Failed to execute run command: {str(e)}")
        raise


def handle_list_scenarios(args):
    """Handle the list-scenarios command from the CLI."""
    for name, definition in sorted(canonical_scenarios().items()):
        variants = ', '.join(spec.label for spec in definition.governors)
        logger.info(f"{name}: {definition.description} [{variants}]")
