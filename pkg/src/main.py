#!/usr/bin/env python3
"""
Preview Reference Governor CLI
A tool for building admissible sets and running governed closed-loop experiments.
"""

import argparse
import logging
import os
import sys
from pathlib import Path
from dotenv import load_dotenv

# Import handlers at module level
from src.modules.build import handle_build_set
from src.modules.run import handle_run, handle_list_scenarios
from src.modules.bench import handle_bench
from src.modules.config import VARIANTS

# Load environment variables
load_dotenv()


def setup_logging():
    """Configure logging to both file and console."""
    log_file = os.getenv('LOG_FILE', 'logs/app.log')
    log_level = os.getenv('LOG_LEVEL', 'INFO')

    # Create logs directory if it doesn't exist
    Path(log_file).parent.mkdir(parents=True, exist_ok=True)

    logging.basicConfig(
        level=getattr(logging, log_level),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.FileHandler(log_file),
            logging.StreamHandler(sys.stdout)
        ]
    )


def add_governor_arguments(parser, single=True):
    """Governor selection and parameter flags shared by build-set and run."""
    if single:
        parser.add_argument('--governor', choices=VARIANTS,
                            help='Governor variant (default: the scenario governors)')
    parser.add_argument('--n', type=int, help='Preview horizon N')
    parser.add_argument('--horizons', help='Comma-separated horizons (multi_prg, multi-input, drg_prg)')
    parser.add_argument('--lambda', dest='lambdas', help='Comma-separated λ values (lambda_prg)')
    parser.add_argument('--epsilon', type=float, help='Steady-state tightening ε in (0, 1)')


def create_parser():
    """Create and configure the argument parser."""
    parser = argparse.ArgumentParser(
        description='Build admissible sets and run preview reference governor experiments.')

    # Global flags
    parser.add_argument(
        '--prod',
        action='store_true',
        help='Run in production mode (default: test mode)'
    )
    parser.add_argument('--config', help='Run configuration document (JSON); flags override it')

    # Subcommands
    subparsers = parser.add_subparsers(
        dest='command', help='Available commands')

    # Build-set command
    build_parser = subparsers.add_parser(
        'build-set', help='Build (or fetch from cache) admissible sets')
    build_parser.add_argument('--scenario', help='Registry scenario or scenario document (JSON) providing model and constraints')
    build_parser.add_argument('--model', help='Model document (JSON) instead of a scenario')
    build_parser.add_argument('--y-min', type=float, nargs='+', help='Output lower bounds for --model')
    build_parser.add_argument('--y-max', type=float, nargs='+', help='Output upper bounds for --model')
    add_governor_arguments(build_parser)
    build_parser.add_argument('--slice', action='store_true',
                              help='Also write the command slice at x=0 for sets with two or more command entries')
    build_parser.add_argument('--out', help='Output directory for set documents')

    # Run command
    run_parser = subparsers.add_parser('run', help='Run a governed scenario')
    run_parser.add_argument('--scenario', help='Registry scenario name or scenario document path (default: one_link)')
    add_governor_arguments(run_parser)
    run_parser.add_argument('--seed', type=int, help='Disturbance stream seed')
    run_parser.add_argument('--out', help='Output directory')
    run_parser.add_argument(
        '--timing',
        action='store_true',
        help='Write measured per-step wall times (otherwise 0, keeping outputs deterministic)'
    )

    # Bench command
    bench_parser = subparsers.add_parser('bench', help='Compare per-step governor latency')
    bench_parser.add_argument('--scenario', help='Registry scenario name or scenario document path (default: one_link)')
    bench_parser.add_argument('--governors', help='Comma-separated governor variants')
    add_governor_arguments(bench_parser, single=False)
    bench_parser.add_argument('--repeats', type=int, help='Timed repetitions per governor (default: 10)')
    bench_parser.add_argument('--out', help='Output directory')
    bench_parser.add_argument(
        '--assert-ordering',
        action='store_true',
        help='Exit non-zero unless mean step times increase in the listed order'
    )

    # List-scenarios command
    subparsers.add_parser('list-scenarios', help='List the registry scenarios')

    return parser


def main():
    """Main entry point for the CLI application."""
    # Set up logging
    setup_logging()
    logger = logging.getLogger(__name__)

    # Parse arguments
    parser = create_parser()
    args = parser.parse_args()

    # Set environment mode
    os.environ['ENV_MODE'] = 'prod' if args.prod else 'test'
    logger.info("Running in %s mode", os.getenv('ENV_MODE'))

    if not args.command:
        parser.print_help()
        sys.exit(1)

    try:
        if args.command == 'build-set':
            handle_build_set(args)
        elif args.command == 'run':
            handle_run(args)
        elif args.command == 'bench':
            handle_bench(args)
        elif args.command == 'list-scenarios':
            handle_list_scenarios(args)
    except Exception as e:
        logger.error("Error executing command %s: %s", args.command, str(e))
        sys.exit(1)


if __name__ == '__main__':
    main()
