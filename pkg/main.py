"""
FloquetQS - quasi-stationary states of periodically modulated open quantum systems
Main entry point
"""

import argparse
import logging
import sys
from pathlib import Path
from typing import List, Optional

import yaml
from dotenv import load_dotenv

# Load environment variables from .env file before importing config
load_dotenv()

# Add src to path
sys.path.insert(0, str(Path(__file__).parent))

from src.core.exceptions import FloquetError
from src.commands.solve import solve_command
from src.commands.sweep import sweep_command
from src.commands.validate import validate_command
from src.utils.config import get_config
from src.utils.experiment_config import ConfigValidationError
from src.utils.logger import setup_logging

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVALID = 1
EXIT_SOLVER = 2

COMMANDS = {
    'solve': solve_command,
    'sweep': sweep_command,
    'validate': validate_command,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog='floquetqs',
        description='Quasi-stationary states, spectra and correlations of modulated open quantum systems',
    )
    parser.add_argument('--log-level', default=None, help='DEBUG, INFO, WARNING, ERROR (default from runtime config)')
    subparsers = parser.add_subparsers(dest='command', required=True)

    solve = subparsers.add_parser('solve', help='Run one experiment config')
    solve.add_argument('config', help='Experiment YAML file')
    solve.add_argument('--out', default=None, help='Output directory (default: <runtime.output_dir>/<name>)')
    solve.add_argument('--workers', type=int, default=None, help='Threads for correlation grids')
    solve.add_argument('--oracle', action='store_true', help='Cross-check against brute-force propagation')

    sweep = subparsers.add_parser('sweep', help='Run a config once per value of a parameter')
    sweep.add_argument('config', help='Experiment YAML file')
    sweep.add_argument('--param', default=None, help='Dotted config path, e.g. model.flux')
    sweep.add_argument('--values', default=None, help='Comma-separated values')
    sweep.add_argument('--out', default=None, help='Output directory')
    sweep.add_argument('--workers', type=int, default=None, help='Worker processes')
    sweep.add_argument('--oracle', action='store_true', help='Cross-check every point against brute force')

    validate = subparsers.add_parser('validate', help='Check a config without solving')
    validate.add_argument('config', help='Experiment YAML file')

    return parser


def main(argv: Optional[List[str]] = None) -> int:
    """
    Main entry point for FloquetQS

    Returns:
        0 success, 1 invalid input, 2 solver failure
    """
    args = build_parser().parse_args(argv)

    try:
        runtime = get_config()
    except (ValueError, yaml.YAMLError) as e:
        print(f"runtime config: {e}", file=sys.stderr)
        return EXIT_INVALID

    setup_logging(
        level=args.log_level or runtime.log_level,
        log_file=runtime.log_file,
        console=runtime.get('logging.console', True)
    )
    logger.debug(f"Command: {args.command} {args.config}")

    try:
        return COMMANDS[args.command](args, runtime)
    except ConfigValidationError as e:
        for error in e.errors:
            print(error, file=sys.stderr)
        return EXIT_INVALID
    except FloquetError as e:
        logger.error(f"Solver failure: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_SOLVER
    except (ValueError, FileNotFoundError, yaml.YAMLError) as e:
        logger.error(f"Invalid input: {e}")
        print(str(e), file=sys.stderr)
        return EXIT_INVALID


if __name__ == '__main__':
    sys.exit(main())
