"""
Base result writer interface
"""

import logging
from abc import ABC, abstractmethod
from dataclasses import dataclass
from pathlib import Path
from typing import List, Sequence

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Table:
    """
    Column-oriented result table

    Attributes:
        name: File stem
        columns: Header names, units included (e.g. 'tau_c/T')
        data: Array (rows, columns) of real numbers
        description: One-line summary for the manifest
    """
    name: str
    columns: Sequence[str]
    data: np.ndarray
    description: str = ""

    def __post_init__(self):
        data = np.asarray(self.data)
        if data.ndim != 2 or data.shape[1] != len(self.columns):
            raise ValueError(
                f"Table {self.name}: data shape {data.shape} does not match {len(self.columns)} columns"
            )
        if np.iscomplexobj(data):
            raise TypeError(f"Table {self.name}: split complex data into real columns")

    @classmethod
    def from_columns(cls, name: str, columns: dict, description: str = "") -> "Table":
        """Build a table from name -> 1-d array"""
        arrays = [np.asarray(values, dtype=float).ravel() for values in columns.values()]
        return cls(name=name, columns=list(columns), data=np.column_stack(arrays), description=description)


class BaseWriter(ABC):
    """
    Base class for result writers bound to one output directory
    """

    def __init__(self, directory):
        self.directory = Path(directory)
        self._written: List[Path] = []

    @property
    def written(self) -> List[Path]:
        """Files created by this writer, in creation order"""
        return list(self._written)

    @abstractmethod
    def write(self, table: Table) -> Path:
        """
        Write a table

        Args:
            table: Table to write

        Returns:
            Path of the created file
        """
        pass

    def _record(self, path: Path) -> Path:
        self._written.append(path)
        return path

    def remove_written(self) -> int:
        """
        Delete every file this writer created

        Returns:
            Number of files removed
        """
        removed = 0
        for path in reversed(self._written):
            try:
                path.unlink()
                removed += 1
            except FileNotFoundError:
                pass
        self._written.clear()
        if removed:
            logger.info(f"Removed {removed} partial output files from {self.directory}")
        return removed
