"""
sweep command
"""

import logging
from argparse import Namespace
from pathlib import Path

from ..core.sweep_manager import run_sweep
from ..utils.config import Config
from ..utils.experiment_config import load_config
from ..utils.validators import parse_value_list, prepare_output_dir, validate_workers

logger = logging.getLogger(__name__)

EXIT_POINT_FAILED = 2


def sweep_command(args: Namespace, runtime: Config) -> int:
    """
    Handle `sweep <config>` - one run per value of a config path

    Usage:
        sweep fig2.yaml --param model.flux --values 0.01,1,10,100

    --param/--values fall back to the config's own sweep block.

    Returns:
        0 when every point succeeded, 2 when any point failed
    """
    cfg = load_config(args.config)
    parameter = args.param
    values = parse_value_list(args.values) if args.values else None
    if cfg.sweep is not None:
        parameter = parameter or cfg.sweep.parameter
        values = values or list(cfg.sweep.values)
    if not parameter or not values:
        raise ValueError("sweep needs --param and --values (or a sweep block in the config)")

    workers = validate_workers(args.workers or runtime.workers)
    out_dir = prepare_output_dir(args.out or Path(runtime.output_dir) / cfg.name)

    result = run_sweep(cfg, parameter, values, out_dir, workers=workers,
                       oracle=args.oracle, dense_limit=runtime.dense_limit)
    print(result.table_path)
    for point in result.failed:
        print(f"{parameter}={point.value:g}: {point.error}")
    return 0 if result.ok else EXIT_POINT_FAILED
