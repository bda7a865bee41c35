"""
solve command
"""

import logging
from argparse import Namespace
from pathlib import Path

from ..core.experiment_manager import run_experiment
from ..utils.config import Config
from ..utils.experiment_config import load_config
from ..utils.validators import prepare_output_dir, validate_workers

logger = logging.getLogger(__name__)


def solve_command(args: Namespace, runtime: Config) -> int:
    """
    Handle `solve <config>` - run one experiment

    Usage:
        solve fig3.yaml --out results/fig3 --workers 4 --oracle

    Args:
        args: Parsed arguments (config, out, workers, oracle)
        runtime: Runtime settings supplying defaults

    Returns:
        Exit code 0; validation and solver errors propagate to main
    """
    cfg = load_config(args.config)
    workers = validate_workers(args.workers or runtime.workers)
    out_dir = prepare_output_dir(args.out or Path(runtime.output_dir) / cfg.name)

    manifest = run_experiment(cfg, out_dir, workers=workers, oracle=args.oracle,
                              dense_limit=runtime.dense_limit)
    for name in manifest.file_names:
        print(out_dir / name)
    return 0
