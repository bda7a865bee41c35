"""
Helper utility functions
"""

import logging
import math
from typing import Any

import numpy as np

from .constants import CSV_FLOAT_FORMAT

logger = logging.getLogger(__name__)


def format_float(value: Any) -> str:
    """
    Format a number for CSV output

    Args:
        value: Real number

    Returns:
        17 significant digits, 'nan'/'inf'/'-inf' for non-finite values
    """
    value = float(value)
    if math.isnan(value):
        return 'nan'
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    if value == 0.0:
        # drop the sign of negative zero
        return '0'
    return CSV_FLOAT_FORMAT.format(value)


def plain_value(value: Any) -> Any:
    """
    Convert numpy scalars/arrays and complex numbers to YAML-safe Python values
    """
    if isinstance(value, dict):
        return {str(k): plain_value(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain_value(v) for v in value]
    if isinstance(value, np.ndarray):
        return plain_value(value.tolist())
    if isinstance(value, (np.bool_, bool)):
        return bool(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (complex, np.complexfloating)):
        value = complex(value)
        return [value.real, value.imag] if value.imag else value.real
    return value


def format_duration(seconds: float) -> str:
    """Human-readable duration"""
    if seconds < 1.0:
        return f"{seconds * 1000:.0f} ms"
    if seconds < 60.0:
        return f"{seconds:.2f} s"
    minutes, rest = divmod(seconds, 60.0)
    return f"{int(minutes)} min {rest:.0f} s"
