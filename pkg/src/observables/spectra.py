"""
Power spectra of the scattered field

The elastic part consists of delta lines at omega0 + m Omega. The inelastic
part is a sum of Lorentzians at omega0 + m Omega + Im b_j with half-width
-Re b_j, built from the Floquet decomposition of the generator.
"""

import logging
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

from .amplitudes import AmplitudeTrace, emission_samples
from ..core.floquet import FloquetDecomposition, QuasiStationaryState
from ..core.liouvillian import devectorize, vectorize_operator
from ..models.base import BaseModel
from ..numerics.fourier import fourier_coefficients, period_average
from ..utils.constants import DEFAULT_M_MAX

logger = logging.getLogger(__name__)

CHANNELS = ('L', 'R')


@dataclass(frozen=True)
class ElasticLine:
    harmonic: int
    offset: float
    weight: float


@dataclass(frozen=True)
class LorentzianTerm:
    """
    One inelastic resonance

    Attributes:
        harmonic: Sideband index m
        mode: Floquet mode j
        position: m Omega + Im b_j, relative to omega0
        half_width: -Re b_j
        weight: Complex weight w_{m,j}
    """
    harmonic: int
    mode: int
    position: float
    half_width: float
    weight: complex


@dataclass(frozen=True)
class SpectrumResult:
    """
    Elastic lines and inelastic Lorentzians of one output channel

    Frequencies are offsets from the working frequency omega0.
    """
    channel: str
    omega0: float
    omega: float
    elastic: List[ElasticLine] = field(default_factory=list)
    inelastic: List[LorentzianTerm] = field(default_factory=list)
    mean_inelastic_flux: float = 0.0

    @property
    def elastic_weights(self) -> Dict[int, float]:
        return {line.harmonic: line.weight for line in self.elastic}

    @property
    def inelastic_weight(self) -> complex:
        """Sum of all inelastic weights (equals the mean inelastic flux)"""
        return complex(sum(term.weight for term in self.inelastic))


def _check_channel(channel: str) -> None:
    if channel not in CHANNELS:
        raise ValueError(f"Unknown output channel {channel!r}, expected one of {CHANNELS}")


def elastic_spectrum(trace: AmplitudeTrace, channel: str = 'L', omega0: float = 0.0) -> SpectrumResult:
    """
    Elastic weights f |R^(m)|^2 (channel L) or f |T^(m)|^2 (channel R) at m Omega
    """
    _check_channel(channel)
    coefficients = trace.fourier_R if channel == 'L' else trace.fourier_T
    omega = 2.0 * np.pi / trace.period
    lines = [
        ElasticLine(harmonic=m, offset=m * omega, weight=float(trace.flux * abs(c) ** 2))
        for m, c in sorted(coefficients.items())
    ]
    return SpectrumResult(channel=channel, omega0=omega0, omega=omega, elastic=lines)


def fluctuation_source(model: BaseModel, state: QuasiStationaryState, times: np.ndarray) -> np.ndarray:
    """
    Regression initial data G0 = vec(a rho) - tr(a rho) s_qs at each time

    Returns:
        Array (K, D)
    """
    vectors = _state_on(state, times)
    rho = devectorize(vectors, state.basis)
    conditioned = np.einsum('ij,kjl->kil', model.lowering_operator, rho)
    components, traces = vectorize_operator(conditioned, state.basis)
    return components - traces[:, None] * vectors


def _state_on(state: QuasiStationaryState, times: np.ndarray) -> np.ndarray:
    if len(times) == len(state.grid_times) and np.allclose(times, state.grid_times):
        return state.grid_vectors
    return state.at(times)


def inelastic_spectrum(
    model: BaseModel,
    state: QuasiStationaryState,
    floq: FloquetDecomposition,
    m_max: Optional[int] = None,
    channel: str = 'L',
    omega0: Optional[float] = None
) -> SpectrumResult:
    """
    Lorentzian decomposition of the time-averaged inelastic spectrum

    With V+(t) = l*(t) [row of P(t) for <a^+>] and V0(t) = l(t) P(t)^-1 G0(t),
    the weights are w_{m,j} = (V+^(-m) chi_r_j)(chi_l_j V0^(m)).

    Args:
        model: Qubit or Lambda model
        state: Quasi-stationary state
        floq: Floquet decomposition on a uniform period grid
        m_max: Highest sideband (defaults to the state's)
        channel: 'L' or 'R' (the inelastic part is the same for both)
        omega0: Working frequency label (defaults to the model's)

    Returns:
        SpectrumResult with the inelastic terms filled in
    """
    _check_channel(channel)
    if omega0 is None:
        omega0 = float(getattr(model, 'omega0', 0.0))
    times = floq.times[:-1]
    n_samples = len(times)
    if m_max is None:
        m_max = min(state.m_max, DEFAULT_M_MAX)
    m_max = min(m_max, n_samples // 2 - 1)

    ell = emission_samples(model, times)
    source = fluctuation_source(model, state, times)
    projected_source = floq.inverse_apply(source) * ell[:, None]
    raising_row = floq.periodic[:n_samples, model.raising_component, :] * np.conj(ell)[:, None]

    eigen = floq.eigen
    # columns are modes j
    plus = raising_row @ eigen.right
    zero = projected_source @ eigen.left.T

    plus_harmonics = fourier_coefficients(plus, m_max, period=floq.period, times=times)
    zero_harmonics = fourier_coefficients(zero, m_max, period=floq.period, times=times)

    omega = 2.0 * np.pi / floq.period
    terms = []
    for m in range(-m_max, m_max + 1):
        weights = plus_harmonics[-m] * zero_harmonics[m]
        for j, exponent in enumerate(eigen.values):
            terms.append(LorentzianTerm(
                harmonic=m,
                mode=j,
                position=float(m * omega + exponent.imag),
                half_width=float(-exponent.real),
                weight=complex(weights[j]),
            ))

    total = sum(term.weight for term in terms)
    mean_inelastic = float(np.real(period_average(
        np.abs(ell) ** 2 * np.real(source[:, model.raising_component])
    )))
    logger.debug(
        f"Inelastic spectrum: {len(terms)} terms, weight {total.real:.6g} vs mean inelastic flux {mean_inelastic:.6g}"
    )
    return SpectrumResult(channel=channel, omega0=omega0, omega=omega, inelastic=terms,
                          mean_inelastic_flux=mean_inelastic)


def spectrum_density(result: SpectrumResult, frequencies: np.ndarray) -> Tuple[np.ndarray, float]:
    """
    S(Delta) = (1/pi) sum Re[w / (i (Delta - position) + half_width)]

    Args:
        result: SpectrumResult with inelastic terms
        frequencies: Offsets Delta from omega0

    Returns:
        (density, imaginary part of the total inelastic weight)
    """
    frequencies = np.asarray(frequencies, dtype=float)
    total = np.zeros(len(frequencies), dtype=complex)
    for term in result.inelastic:
        total += term.weight / (1j * (frequencies - term.position) + term.half_width)
    total /= np.pi

    residual = abs(result.inelastic_weight.imag)
    return np.real(total), float(residual)
