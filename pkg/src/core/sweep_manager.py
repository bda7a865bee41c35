"""
Sweep manager module
Runs one experiment per sweep value and collects scalar results
"""

import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np
import yaml

from .experiment_manager import run_experiment
from ..storage.base import Table
from ..storage.csv_writer import CsvWriter
from ..utils.constants import DENSE_LIMIT
from ..utils.experiment_config import (
    ExperimentConfig,
    config_to_dict,
    parse_mapping,
    with_override,
)
from ..utils.helpers import format_duration, format_float, plain_value

logger = logging.getLogger(__name__)

SWEEP_TABLE = 'sweep'
SWEEP_MANIFEST = 'sweep_manifest.yaml'


@dataclass
class PointResult:
    """Outcome of one sweep value"""
    index: int
    value: float
    directory: str
    status: str = 'ok'
    error: Optional[str] = None
    scalars: Dict[str, float] = field(default_factory=dict)
    seconds: float = 0.0


@dataclass
class SweepResult:
    parameter: str
    points: List[PointResult]
    table_path: Optional[Path] = None

    @property
    def failed(self) -> List[PointResult]:
        return [p for p in self.points if p.status != 'ok']

    @property
    def ok(self) -> bool:
        return not self.failed


def flatten_scalars(diagnostics: Dict[str, Any], prefix: str = '') -> Dict[str, float]:
    """
    Numeric leaves of a nested diagnostics mapping as 'a.b' -> float

    Booleans count as 0/1; strings and sequences are skipped.
    """
    flat: Dict[str, float] = {}
    for key, value in diagnostics.items():
        name = f"{prefix}{key}"
        if isinstance(value, dict):
            flat.update(flatten_scalars(value, f"{name}."))
        elif isinstance(value, (bool, np.bool_)):
            flat[name] = float(value)
        elif isinstance(value, (int, float, np.integer, np.floating)):
            flat[name] = float(value)
    return flat


def point_directory(index: int, parameter: str, value: float) -> str:
    return f"{index:03d}_{parameter.replace('.', '_')}={format_float(value)}"


def _run_point(
    data: Dict[str, Any],
    parameter: str,
    index: int,
    value: float,
    out_dir: str,
    oracle: bool,
    dense_limit: int
) -> PointResult:
    """Worker entry point; takes plain data so it pickles across processes"""
    started = time.perf_counter()
    directory = point_directory(index, parameter, value)
    result = PointResult(index=index, value=value, directory=directory)
    try:
        cfg = with_override(parse_mapping(data), parameter, value)
        manifest = run_experiment(cfg, Path(out_dir) / directory, workers=1,
                                  oracle=oracle, dense_limit=dense_limit)
        result.scalars = flatten_scalars(manifest.diagnostics)
    except Exception as e:
        result.status = 'failed'
        result.error = f"{type(e).__name__}: {e}"
    result.seconds = time.perf_counter() - started
    return result


class SweepManager:
    """
    Manages a parameter sweep over independent experiment runs

    Each value gets its own run directory; a combined CSV holds the sweep
    value, the run status and every scalar diagnostic.
    """

    def __init__(
        self,
        config: ExperimentConfig,
        parameter: str,
        values: Sequence[float],
        out_dir,
        workers: int = 1,
        oracle: bool = False,
        dense_limit: int = DENSE_LIMIT
    ):
        """
        Initialize sweep manager

        Args:
            config: Validated base config
            parameter: Dotted config path (e.g. 'model.flux')
            values: Sweep values in output order
            out_dir: Root output directory
            workers: Worker processes
        """
        if not values:
            raise ValueError("sweep needs at least one value")
        # fails early on an invalid path
        with_override(config, parameter, values[0])

        self.config = config
        self.parameter = parameter
        self.values = [float(v) for v in values]
        self.out_dir = Path(out_dir)
        self.workers = max(1, int(workers))
        self.oracle = oracle
        self.dense_limit = dense_limit
        logger.info(f"SweepManager initialized: {parameter} over {len(self.values)} values")

    def run(self) -> SweepResult:
        """
        Execute all sweep points

        Returns:
            SweepResult; failed points are recorded, not raised
        """
        started = time.perf_counter()
        self.out_dir.mkdir(parents=True, exist_ok=True)
        data = config_to_dict(self.config)
        data.pop('sweep', None)
        jobs = [
            (data, self.parameter, index, value, str(self.out_dir), self.oracle, self.dense_limit)
            for index, value in enumerate(self.values)
        ]

        if self.workers == 1 or len(jobs) == 1:
            points = [_run_point(*job) for job in jobs]
        else:
            points = []
            with ProcessPoolExecutor(max_workers=min(self.workers, len(jobs))) as executor:
                futures = [executor.submit(_run_point, *job) for job in jobs]
                for future in as_completed(futures):
                    points.append(future.result())

        points.sort(key=lambda p: p.index)
        for point in points:
            if point.status == 'ok':
                logger.info(f"Sweep point {self.parameter}={point.value:g} done in {format_duration(point.seconds)}")
            else:
                logger.error(f"Sweep point {self.parameter}={point.value:g} failed: {point.error}")

        result = SweepResult(parameter=self.parameter, points=points)
        result.table_path = CsvWriter(self.out_dir).write(self.combined_table(points))
        self._write_manifest(result, time.perf_counter() - started)
        logger.info(
            f"Sweep over {self.parameter} finished: {len(points) - len(result.failed)}/{len(points)} ok"
        )
        return result

    def combined_table(self, points: List[PointResult]) -> Table:
        """Rows in sweep order; columns are the sorted union of scalar names"""
        names = sorted({name for point in points for name in point.scalars})
        columns: Dict[str, List[float]] = {self.parameter: [], 'ok': []}
        for name in names:
            columns[name] = []
        for point in points:
            columns[self.parameter].append(point.value)
            columns['ok'].append(1.0 if point.status == 'ok' else 0.0)
            for name in names:
                columns[name].append(point.scalars.get(name, math.nan))
        return Table.from_columns(SWEEP_TABLE, columns, f"Scalar results over {self.parameter}")

    def _write_manifest(self, result: SweepResult, seconds: float) -> Path:
        manifest = {
            'parameter': self.parameter,
            'values': self.values,
            'config': config_to_dict(self.config),
            'combined': result.table_path.name,
            'points': [
                {
                    'value': p.value,
                    'directory': p.directory,
                    'status': p.status,
                    'error': p.error,
                    'seconds': p.seconds,
                }
                for p in result.points
            ],
            'seconds': seconds,
        }
        path = self.out_dir / SWEEP_MANIFEST
        with open(path, 'w', encoding='utf-8') as f:
            yaml.safe_dump(plain_value(manifest), f, default_flow_style=False, sort_keys=False)
        return path


def run_sweep(
    cfg: ExperimentConfig,
    parameter: str,
    values: Sequence[float],
    out_dir,
    workers: int = 1,
    oracle: bool = False,
    dense_limit: int = DENSE_LIMIT
) -> SweepResult:
    """Run a sweep and write per-value outputs plus the combined CSV"""
    manager = SweepManager(cfg, parameter, values, out_dir, workers=workers,
                           oracle=oracle, dense_limit=dense_limit)
    return manager.run()
