"""
Run manifest: config echo, diagnostics, file inventory and timings
"""

import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List

import yaml

from .base import Table
from ..utils.constants import MANIFEST_NAME
from ..utils.helpers import plain_value

logger = logging.getLogger(__name__)


@dataclass
class RunManifest:
    """
    Everything needed to audit or repeat a run

    Attributes:
        config: Resolved experiment config (plain mapping)
        diagnostics: Solver diagnostics
        files: One entry per emitted file with its columns and row count
        timings: Seconds per stage
        status: 'ok' or 'failed'
    """
    config: Dict[str, Any]
    diagnostics: Dict[str, Any] = field(default_factory=dict)
    files: List[Dict[str, Any]] = field(default_factory=list)
    timings: Dict[str, float] = field(default_factory=dict)
    status: str = 'ok'

    def add_file(self, path: Path, table: Table) -> None:
        self.files.append({
            'file': path.name,
            'description': table.description,
            'columns': list(table.columns),
            'rows': int(len(table.data)),
        })

    @property
    def file_names(self) -> List[str]:
        return [entry['file'] for entry in self.files]

    def to_dict(self) -> Dict[str, Any]:
        return plain_value({
            'status': self.status,
            'config': self.config,
            'diagnostics': self.diagnostics,
            'files': self.files,
            'timings': self.timings,
        })


def write_manifest(directory, manifest: RunManifest) -> Path:
    """Write manifest.yaml into directory"""
    path = Path(directory) / MANIFEST_NAME
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        yaml.safe_dump(manifest.to_dict(), f, default_flow_style=False, sort_keys=False)
    logger.debug(f"Manifest written to {path}")
    return path


def read_manifest(path) -> Dict[str, Any]:
    with open(path, 'r', encoding='utf-8') as f:
        return yaml.safe_load(f) or {}
