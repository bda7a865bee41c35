"""
Deterministic CSV output
"""

import csv
import logging
from pathlib import Path

from .base import BaseWriter, Table
from ..utils.helpers import format_float

logger = logging.getLogger(__name__)


class CsvWriter(BaseWriter):
    """
    Writes tables as CSV: header row, 17 significant digits, '\\n' line endings
    """

    def __init__(self, directory):
        super().__init__(directory)
        self.directory.mkdir(parents=True, exist_ok=True)
        logger.debug(f"CsvWriter initialized at {self.directory}")

    def path_for(self, table: Table) -> Path:
        return self.directory / f"{table.name}.csv"

    def write(self, table: Table) -> Path:
        path = self.path_for(table)
        with open(path, 'w', encoding='utf-8', newline='') as f:
            writer = csv.writer(f, lineterminator='\n')
            writer.writerow(table.columns)
            for row in table.data:
                writer.writerow([format_float(value) for value in row])
        logger.debug(f"Wrote {path.name} ({len(table.data)} rows)")
        return self._record(path)
