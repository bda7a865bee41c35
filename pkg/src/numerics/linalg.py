"""
Dense linear algebra helpers
Biorthonormal eigensystems and the period logarithm of a monodromy matrix
"""

import logging
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..core.exceptions import DefectiveMatrixError, NonDissipativeError
from ..utils.constants import MAX_EIGENVECTOR_CONDITION

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class EigenSystem:
    """
    Eigenvalues with biorthonormal right/left eigenvectors

    right[:, j] is the right eigenvector of values[j]; left[j, :] is the
    matching left eigenvector, normalized so that left @ right = identity.
    """
    values: np.ndarray
    right: np.ndarray
    left: np.ndarray
    condition: float

    def reconstruct(self) -> np.ndarray:
        """Rebuild the matrix as sum_j b_j chi_r^(j) chi_l^(j)"""
        return (self.right * self.values) @ self.left

    def biorthonormality_error(self) -> float:
        identity = np.eye(len(self.values))
        return float(np.max(np.abs(self.left @ self.right - identity)))

    def __len__(self) -> int:
        return len(self.values)


def _sorted_eigensystem(values: np.ndarray, right: np.ndarray, max_condition: float) -> EigenSystem:
    order = np.lexsort((-values.imag, -values.real))
    values = values[order]
    right = right[:, order]
    right = right / np.linalg.norm(right, axis=0)

    condition = float(np.linalg.cond(right))
    if not np.isfinite(condition) or condition > max_condition:
        raise DefectiveMatrixError(
            "numerics",
            "matrix is numerically defective, eigenvectors are not independent",
            condition if np.isfinite(condition) else float("inf")
        )

    left = np.linalg.solve(right, np.eye(len(values), dtype=complex))
    return EigenSystem(values=values, right=right, left=left, condition=condition)


def eig_biorthonormal(matrix: np.ndarray, max_condition: float = MAX_EIGENVECTOR_CONDITION) -> EigenSystem:
    """
    Diagonalize a square matrix with biorthonormal eigenvectors

    Args:
        matrix: Square complex matrix
        max_condition: Largest accepted eigenvector-matrix condition number

    Returns:
        EigenSystem sorted by descending real part

    Raises:
        DefectiveMatrixError: eigenvector matrix too ill-conditioned
    """
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"Expected a square matrix, got shape {matrix.shape}")
    if not np.all(np.isfinite(matrix)):
        raise ValueError("Matrix has non-finite entries")

    values, right = scipy.linalg.eig(matrix, right=True)
    return _sorted_eigensystem(values, right, max_condition)


def principal_log(multipliers: np.ndarray, period: float) -> np.ndarray:
    """
    Floquet exponents from multipliers on the principal branch

    Imaginary parts fall in (-pi/T, pi/T]; the lower boundary is folded up.
    """
    moduli = np.abs(multipliers)
    if np.any(moduli >= 1.0):
        worst = float(np.max(moduli))
        raise NonDissipativeError(
            "numerics",
            f"monodromy eigenvalue modulus {worst:.6f} >= 1 (non-decaying mode)",
            modulus=worst
        )
    if np.any(moduli == 0.0):
        raise ValueError("Monodromy matrix is singular")

    logs = np.log(multipliers.astype(complex))
    on_boundary = np.isclose(logs.imag, -np.pi, rtol=0.0, atol=1e-12)
    logs = np.where(on_boundary, logs.real + 1j * np.pi, logs)
    return logs / period


def log_eigensystem(monodromy: np.ndarray, period: float) -> EigenSystem:
    """
    EigenSystem of B = log(O_T)/T, sharing the eigenvectors of O_T
    """
    if period <= 0:
        raise ValueError(f"Period must be positive, got {period}")
    multipliers, right = scipy.linalg.eig(np.asarray(monodromy, dtype=complex), right=True)
    exponents = principal_log(multipliers, period)
    return _sorted_eigensystem(exponents, right, MAX_EIGENVECTOR_CONDITION)


def matrix_log_over_period(monodromy: np.ndarray, period: float) -> np.ndarray:
    """
    Matrix B with exp(B T) = O_T on the principal branch

    Args:
        monodromy: One-period fundamental matrix O(T)
        period: Period T

    Returns:
        Matrix B

    Raises:
        NonDissipativeError: an eigenvalue modulus is >= 1
        DefectiveMatrixError: O_T not diagonalizable within tolerance
    """
    return log_eigensystem(monodromy, period).reconstruct()


def slowest_rate(values: np.ndarray) -> float:
    """Smallest decay rate min_j(-Re lambda_j)"""
    return float(np.min(-np.real(values)))
