"""
validate command
"""

import logging
import sys
from argparse import Namespace

from ..utils.config import Config
from ..utils.experiment_config import ConfigValidationError, load_config

logger = logging.getLogger(__name__)


def validate_command(args: Namespace, runtime: Config) -> int:
    """
    Handle `validate <config>` - check a config without solving

    Prints every error on its own line.

    Returns:
        0 if valid, 1 otherwise
    """
    try:
        cfg = load_config(args.config)
    except ConfigValidationError as e:
        for error in e.errors:
            print(error, file=sys.stderr)
        return 1

    print(f"{args.config}: ok ({cfg.model.kind}, outputs: {', '.join(cfg.output_names)})")
    return 0
