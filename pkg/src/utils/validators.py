"""
Command-line input validation utilities
"""

import logging
import os
from pathlib import Path
from typing import List

logger = logging.getLogger(__name__)


def parse_value_list(text: str) -> List[float]:
    """
    Parse a comma-separated list of numbers

    Args:
        text: e.g. "0.01,1,10,100"

    Returns:
        List of floats in the given order

    Raises:
        ValueError: empty list or non-numeric entry
    """
    items = [item.strip() for item in text.split(',') if item.strip()]
    if not items:
        raise ValueError("value list is empty")
    values = []
    for item in items:
        try:
            values.append(float(item))
        except ValueError:
            raise ValueError(f"not a number in value list: {item!r}") from None
    return values


def validate_workers(workers: int) -> int:
    """
    Check a worker count against the available CPUs

    Raises:
        ValueError: workers < 1
    """
    if workers < 1:
        raise ValueError(f"worker count must be positive, got {workers}")
    available = os.cpu_count() or 1
    if workers > available:
        logger.warning(f"Requested {workers} workers, only {available} CPUs available")
    return workers


def prepare_output_dir(path) -> Path:
    """
    Create an output directory and make sure it is writable

    Raises:
        ValueError: path exists and is not a directory, or is not writable
    """
    path = Path(path)
    if path.exists() and not path.is_dir():
        raise ValueError(f"output path is not a directory: {path}")
    path.mkdir(parents=True, exist_ok=True)
    if not os.access(path, os.W_OK):
        raise ValueError(f"output directory is not writable: {path}")
    return path
