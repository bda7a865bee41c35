"""
Kerr cavity observables: occupation, entropy and the dynamic hysteresis loop
"""

import logging
from dataclasses import dataclass

import numpy as np

from ..core.exceptions import TruncationError
from ..core.floquet import QuasiStationaryState
from ..models.kerr import KerrModel
from ..utils.constants import ENTROPY_CLIP, NEGATIVE_EIGENVALUE_LIMIT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class KerrObservables:
    """
    Per-sample Kerr observables over one period (endpoint included)

    Attributes:
        times: Period grid
        detuning: delta(tau_c)
        occupation: <b^+ b>(tau_c)
        entropy: -tr rho ln rho
        loop_area: Signed area of (delta, occupation), counter-clockwise positive
        min_eigenvalue: Smallest density-matrix eigenvalue before clipping
    """
    times: np.ndarray
    detuning: np.ndarray
    occupation: np.ndarray
    entropy: np.ndarray
    loop_area: float
    min_eigenvalue: float

    @property
    def loop_area_abs(self) -> float:
        return abs(self.loop_area)

    @property
    def peak_occupation(self) -> float:
        return float(np.max(self.occupation))


def von_neumann_entropy(eigenvalues: np.ndarray) -> np.ndarray:
    """
    -sum p ln p per row of eigenvalues

    Raises:
        TruncationError: eigenvalue below the negative limit
    """
    eigenvalues = np.asarray(eigenvalues, dtype=float)
    lowest = float(np.min(eigenvalues))
    if lowest < -NEGATIVE_EIGENVALUE_LIMIT:
        raise TruncationError(
            "observables",
            f"density matrix eigenvalue {lowest:.3e} below -{NEGATIVE_EIGENVALUE_LIMIT:.0e}"
        )
    if lowest < -ENTROPY_CLIP:
        logger.warning(f"Clipping density matrix eigenvalue {lowest:.3e} to zero")
    p = np.clip(eigenvalues, 0.0, None)
    with np.errstate(divide='ignore', invalid='ignore'):
        terms = np.where(p > 0.0, -p * np.log(np.where(p > 0.0, p, 1.0)), 0.0)
    return np.sum(terms, axis=-1)


def shoelace_area(x: np.ndarray, y: np.ndarray) -> float:
    """Signed area of a closed polygon; the closing edge is implied"""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(0.5 * np.sum(x * np.roll(y, -1) - np.roll(x, -1) * y))


def kerr_observables(state: QuasiStationaryState, model: KerrModel) -> KerrObservables:
    """
    Occupation, entropy and hysteresis loop area of a Kerr quasi-stationary state

    Raises:
        TruncationError: negative eigenvalues beyond the tolerated limit
    """
    rho = state.density_matrices()
    hermitian = 0.5 * (rho + np.conj(np.swapaxes(rho, 1, 2)))
    eigenvalues = np.linalg.eigvalsh(hermitian)
    entropy = von_neumann_entropy(eigenvalues)

    levels = np.arange(model.dimension, dtype=float)
    occupation = np.real(np.einsum('kii,i->k', rho, levels))
    detuning = np.real(np.broadcast_to(model.detuning(state.times), state.times.shape))

    area = 0.0 if model.is_static else shoelace_area(detuning[:-1], occupation[:-1])
    logger.debug(f"Kerr observables: peak occupation {np.max(occupation):.4g}, loop area {area:.4g}")
    return KerrObservables(
        times=state.times,
        detuning=detuning,
        occupation=occupation,
        entropy=entropy,
        loop_area=area,
        min_eigenvalue=float(np.min(eigenvalues)),
    )
