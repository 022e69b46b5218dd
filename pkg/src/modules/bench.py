"""
Module for the bench command: per-step latency comparison across governors.
"""

import logging
import os
from typing import Dict, List

from .config import run_config_from_args
from .database import SetCache
from .errors import AssertionFailedError
from .export import ResultExporter
from .scenario import get_scenario, run_timing_comparison

logger = logging.getLogger(__name__)

DEFAULT_SCENARIO = 'one_link'


def check_ordering(table: List[Dict]) -> bool:
    """Whether mean latencies strictly increase in table order."""
    means = [row['mean_ns'] for row in table]
    return all(a < b for a, b in zip(means, means[1:]))


def handle_bench(args):
    """Handle the bench command from the CLI."""
    try:
        config = run_config_from_args(args)
        scenario = config.scenario or DEFAULT_SCENARIO
        definition = get_scenario(scenario)

        with SetCache() as cache:
            table = run_timing_comparison(definition, config.governors or None, config.repeats, cache.provide)

        output_dir = config.output_dir or os.path.join(os.getenv('PRG_OUTPUT_DIR', 'data/results'), 'bench')
        exporter = ResultExporter(timing=True)
        exporter.export_timing(table, os.path.join(output_dir, f'{definition.name}_timing.csv'), 'csv')
        exporter.export_timing(table, os.path.join(output_dir, f'{definition.name}_timing.json'), 'json')

        for row in table:
            logger.info(f"{row['governor']}: mean {row['mean_ns'] / 1000:.1f} us, "
                        f"max {row['max_ns'] / 1000:.1f} us over {row['repeats']} repeats")

        if getattr(args, 'assert_ordering', False) and not check_ordering(table):
            order = ' < '.join(row['governor'] for row in table)
            raise AssertionFailedError(f"Mean step time ordering {order} does not hold")
        return table

    except Exception as e:
        logger.error(f"Failed to execute bench command: {str(e)}")
        raise
