"""
Input-output amplitudes and photon fluxes of the scattered field
"""

import logging
from dataclasses import dataclass
from typing import Dict, Optional

import numpy as np

from ..core.floquet import QuasiStationaryState
from ..models.base import BaseModel
from ..numerics.fourier import fourier_coefficients, period_average
from ..utils.constants import VANISHING_FLUX

logger = logging.getLogger(__name__)

# Residual above which flux bookkeeping is reported
CONSERVATION_TOL = 1e-6


@dataclass(frozen=True)
class AmplitudeTrace:
    """
    Reflection and transmission over one period

    Attributes:
        times: Period grid including the endpoint
        R: Reflection amplitude R(tau_c)
        T: Transmission amplitude, 1 + R
        fourier_R: Harmonic m -> R^(m)
        fourier_T: Harmonic m -> T^(m)
        flux: Input flux f
        period: Modulation period
    """
    times: np.ndarray
    R: np.ndarray
    T: np.ndarray
    fourier_R: Dict[int, complex]
    fourier_T: Dict[int, complex]
    flux: float
    period: float

    @property
    def reflectance(self) -> np.ndarray:
        return np.abs(self.R) ** 2

    @property
    def transmittance(self) -> np.ndarray:
        return np.abs(self.T) ** 2


@dataclass(frozen=True)
class FluxResult:
    """
    Outgoing photon fluxes per channel

    left/right are the total fluxes f_L(tau_c), f_R(tau_c); the elastic and
    inelastic parts add up to them. Means are period averages.
    """
    times: np.ndarray
    left: np.ndarray
    right: np.ndarray
    elastic_left: np.ndarray
    elastic_right: np.ndarray
    inelastic: np.ndarray
    flux: float
    correlation_mismatch: Optional[float] = None

    @property
    def mean_left(self) -> float:
        return float(period_average(self.left[:-1]))

    @property
    def mean_right(self) -> float:
        return float(period_average(self.right[:-1]))


def emission_samples(model: BaseModel, times: np.ndarray) -> np.ndarray:
    """l(t) on an array of times"""
    times = np.asarray(times, dtype=float)
    return np.broadcast_to(np.asarray(model.emission_amplitude(times), dtype=complex), times.shape)


def lowering_expectation(model: BaseModel, state: QuasiStationaryState) -> np.ndarray:
    """<lowering operator>(tau_c) on the state grid"""
    return state.vectors[:, model.emitter_component] / state.basis.scales[model.emitter_component]


def reflection_transmission(model: BaseModel, state: QuasiStationaryState) -> AmplitudeTrace:
    """
    R(tau_c) = l(tau_c) <sigma_->(tau_c) / sqrt(f) and T = 1 + R

    Args:
        model: Qubit or Lambda model
        state: Quasi-stationary state of the model

    Returns:
        AmplitudeTrace with samples and Fourier coefficients

    Raises:
        ValueError: f <= 0 (amplitudes undefined)
    """
    if model.flux <= 0:
        raise ValueError(f"observables: amplitudes need a positive input flux, got f={model.flux}")

    ell = emission_samples(model, state.times)
    R = ell * lowering_expectation(model, state) / np.sqrt(model.flux)
    T = 1.0 + R
    return AmplitudeTrace(
        times=state.times,
        R=R,
        T=T,
        fourier_R=fourier_coefficients(R, state.m_max, period=state.period, times=state.times),
        fourier_T=fourier_coefficients(T, state.m_max, period=state.period, times=state.times),
        flux=float(model.flux),
        period=state.period,
    )


def output_fluxes(model: BaseModel, state: QuasiStationaryState, correlations=None) -> FluxResult:
    """
    f_L = <a_L^+ a_L>, f_R = <a_R^+ a_R> with a_L = l a and a_R = sqrt(f) + l a

    Args:
        model: Qubit or Lambda model
        state: Quasi-stationary state
        correlations: Optional g1 CorrelationResult; its tau = 0 row is compared with the flux

    Returns:
        FluxResult
    """
    a = model.lowering_operator
    rho = state.density_matrices()
    occupation = np.real(np.einsum('ij,kji->k', a.conj().T @ a, rho))
    coherence = np.einsum('ij,kji->k', a, rho)
    ell = emission_samples(model, state.times)
    weight = np.abs(ell) ** 2

    elastic_left = weight * np.abs(coherence) ** 2
    elastic_right = np.abs(np.sqrt(model.flux) + ell * coherence) ** 2
    inelastic = weight * (occupation - np.abs(coherence) ** 2)

    result = FluxResult(
        times=state.times,
        left=elastic_left + inelastic,
        right=elastic_right + inelastic,
        elastic_left=elastic_left,
        elastic_right=elastic_right,
        inelastic=inelastic,
        flux=float(model.flux),
    )
    if correlations is not None:
        result = _with_correlation_check(result, state, correlations)
    return result


def _with_correlation_check(result: FluxResult, state: QuasiStationaryState, correlations) -> FluxResult:
    zero = np.flatnonzero(correlations.tau == 0.0)
    if len(zero) == 0:
        logger.warning("g1 grid has no tau = 0 row, flux cross-check skipped")
        return result
    channel = result.left if correlations.channel == 'L' else result.right
    reference = np.interp(correlations.tau_c, state.times, channel)
    mismatch = float(np.max(np.abs(correlations.values[zero[0]] - reference)))
    logger.debug(f"Flux vs g1(0) mismatch: {mismatch:.3e}")
    return FluxResult(**{**result.__dict__, 'correlation_mismatch': mismatch})


def power_conservation(fluxes: FluxResult) -> Dict[str, float]:
    """
    Period-averaged flux bookkeeping

    Returns:
        residual |f_L + f_R - f| / f plus elastic and inelastic averages
    """
    grid = slice(0, -1)
    summary = {
        'mean_left': fluxes.mean_left,
        'mean_right': fluxes.mean_right,
        'elastic_left': float(period_average(fluxes.elastic_left[grid])),
        'elastic_right': float(period_average(fluxes.elastic_right[grid])),
        'inelastic': float(period_average(fluxes.inelastic[grid])),
    }
    if fluxes.flux <= VANISHING_FLUX:
        summary['residual'] = 0.0
        return summary

    residual = abs(fluxes.mean_left + fluxes.mean_right - fluxes.flux) / fluxes.flux
    summary['residual'] = float(residual)
    if residual > CONSERVATION_TOL:
        logger.warning(f"Power conservation residual {residual:.3e} exceeds {CONSERVATION_TOL:.0e}")
    return summary
