"""
Approximations to the quasi-stationary state

- adiabatic: instantaneous steady state plus the first correction in d/dt
- high-frequency: hierarchy in powers of 1/Omega around the period average
- weak power: linear response of the qubit coherence
"""

import logging
from dataclasses import dataclass
from typing import List, Optional

import numpy as np
import scipy.sparse as sp

from .exceptions import SingularGeneratorError
from .liouvillian import PeriodicGenerator, dissipation_gap, solve_operator
from ..models.qubit import QubitModel
from ..numerics.fourier import (
    period_average,
    period_grid,
    spectral_derivative,
    zero_mean_antiderivative,
)
from ..utils.constants import DEFAULT_GRID, DENSE_LIMIT, WEAK_POWER_RATIO

logger = logging.getLogger(__name__)

# A(t) with a larger condition number counts as singular
SINGULAR_CONDITION = 1e12


@dataclass(frozen=True)
class AdiabaticResult:
    """
    Adiabatic approximation on the period grid (endpoint included)

    Attributes:
        instantaneous: -A(t)^-1 C(t); flagged points are interpolated
        corrected: First-order result, None for order 0
        valid: gamma_min(A(t)) > Omega
        singular: Points where A(t) could not be inverted
        gamma_min: Instantaneous dissipation gap
    """
    times: np.ndarray
    order: int
    instantaneous: np.ndarray
    corrected: Optional[np.ndarray]
    valid: np.ndarray
    singular: np.ndarray
    gamma_min: np.ndarray

    @property
    def result(self) -> np.ndarray:
        return self.instantaneous if self.corrected is None else self.corrected


@dataclass(frozen=True)
class HighFrequencyResult:
    """
    High-frequency hierarchy up to order n

    constant_parts[k] and oscillating_parts[k-1] are the order-k contributions
    already scaled by Omega^-k; assembled is their sum.
    """
    times: np.ndarray
    order: int
    constant_parts: List[np.ndarray]
    oscillating_parts: List[np.ndarray]
    assembled: np.ndarray


@dataclass(frozen=True)
class WeakPowerResult:
    times: np.ndarray
    s2: np.ndarray


def _close(samples: np.ndarray) -> np.ndarray:
    """Append the t = T sample of periodic data"""
    return np.concatenate([samples, samples[:1]], axis=0)


def _fill_flagged(samples: np.ndarray, flagged: np.ndarray, period: float, times: np.ndarray) -> np.ndarray:
    """Periodic linear interpolation across flagged grid points"""
    if not np.any(flagged):
        return samples
    good = ~flagged
    if not np.any(good):
        raise SingularGeneratorError("expansions", "A(t) is singular on the whole grid")
    filled = samples.copy()
    for column in range(samples.shape[1]):
        for part in (np.real, np.imag):
            values = np.interp(times[flagged], times[good], part(samples[good, column]), period=period)
            if part is np.real:
                filled[flagged, column] = values
            else:
                filled[flagged, column] += 1j * values
    return filled


def _checked_solve(gen: PeriodicGenerator, t: float, rhs: np.ndarray) -> np.ndarray:
    matrix = gen.operator(t)
    if not sp.issparse(matrix) and np.linalg.cond(matrix) > SINGULAR_CONDITION:
        raise SingularGeneratorError("expansions", f"A(t={t:.6g}) is numerically singular")
    return solve_operator(matrix, rhs, f"A(t={t:.6g})")


def _gap_profile(gen: PeriodicGenerator, times: np.ndarray, stride: int) -> np.ndarray:
    sampled = np.arange(0, len(times), stride)
    gaps = np.array([dissipation_gap(gen.operator(times[k])) for k in sampled])
    # nearest sampled point
    nearest = np.minimum(np.rint(np.arange(len(times)) / stride).astype(int), len(sampled) - 1)
    return gaps[nearest]


def adiabatic_expansion(
    gen: PeriodicGenerator,
    order: int = 1,
    n_grid: int = DEFAULT_GRID,
    mask_stride: Optional[int] = None
) -> AdiabaticResult:
    """
    rho_qs ~ rho_inst + A^-1 d(rho_inst)/dt with rho_inst = -A^-1 C

    Args:
        gen: Periodic generator
        order: 0 or 1
        n_grid: Samples per period
        mask_stride: Grid stride for the gamma_min indicator (default 1 for dense, 16 for sparse)

    Returns:
        AdiabaticResult; singular points are flagged, not fatal
    """
    if order not in (0, 1):
        raise ValueError(f"Adiabatic order must be 0 or 1, got {order}")

    times = period_grid(gen.period, n_grid)[:-1]
    dimension = gen.dimension
    instantaneous = np.zeros((len(times), dimension), dtype=complex)
    singular = np.zeros(len(times), dtype=bool)

    for k, t in enumerate(times):
        try:
            instantaneous[k] = _checked_solve(gen, t, -gen.C(t))
        except SingularGeneratorError:
            singular[k] = True
    if np.any(singular):
        logger.info(f"Adiabatic expansion: A(t) singular at {int(np.sum(singular))} grid points")
    instantaneous = _fill_flagged(instantaneous, singular, gen.period, times)

    corrected = None
    if order == 1:
        derivative = spectral_derivative(instantaneous, gen.period)
        correction = np.zeros_like(instantaneous)
        for k, t in enumerate(times):
            if not singular[k]:
                correction[k] = _checked_solve(gen, t, derivative[k])
        correction = _fill_flagged(correction, singular, gen.period, times)
        corrected = instantaneous + correction

    if mask_stride is None:
        mask_stride = 1 if dimension <= DENSE_LIMIT else 16
    gaps = _gap_profile(gen, times, mask_stride)
    valid = (gaps > gen.omega) & ~singular

    return AdiabaticResult(
        times=np.append(times, gen.period),
        order=order,
        instantaneous=_close(instantaneous),
        corrected=None if corrected is None else _close(corrected),
        valid=np.append(valid, valid[0]),
        singular=np.append(singular, singular[0]),
        gamma_min=np.append(gaps, gaps[0]),
    )


def high_frequency_expansion(
    gen: PeriodicGenerator,
    order: int = 1,
    n_grid: int = DEFAULT_GRID
) -> HighFrequencyResult:
    """
    Hierarchy around the period average:

        rho_bar^(0) = -A_bar^-1 C_bar
        d rho_tilde^(1)/dt = A_tilde rho_bar^(0) + C_tilde
        d rho_tilde^(n)/dt = A_tilde rho_bar^(n-1) + A_bar rho_tilde^(n-1)
                             + A_tilde rho_tilde^(n-1) - <A_tilde rho_tilde^(n-1)>
        rho_bar^(n) = -A_bar^-1 <A_tilde rho_tilde^(n)>

    Every rho_tilde is the zero-mean periodic antiderivative.

    Raises:
        SingularGeneratorError: A_bar singular
    """
    if order < 1:
        raise ValueError(f"High-frequency order must be >= 1, got {order}")

    times = period_grid(gen.period, n_grid)[:-1]
    a_bar, c_bar = gen.averaged(times)

    def oscillating_action(vectors: np.ndarray) -> np.ndarray:
        """A_tilde(t_k) v_k for every grid point"""
        return np.array([gen.apply(t, v) - a_bar @ v for t, v in zip(times, vectors)])

    constants = [solve_operator(a_bar, -c_bar, "A_bar")]
    oscillating: List[np.ndarray] = []
    c_tilde = np.array([gen.C(t) for t in times]) - c_bar

    for n in range(1, order + 1):
        previous_constant = np.broadcast_to(constants[-1], (len(times), gen.dimension))
        source = oscillating_action(previous_constant)
        if n == 1:
            source = source + c_tilde
        else:
            previous = oscillating[-1]
            coupled = oscillating_action(previous)
            source = source + np.array([a_bar @ v for v in previous]) + coupled - period_average(coupled)
        current = zero_mean_antiderivative(source, gen.period)
        oscillating.append(current)
        constants.append(solve_operator(a_bar, -period_average(oscillating_action(current)), "A_bar"))

    assembled = sum(constants) + sum(oscillating)
    logger.debug(f"High-frequency expansion to order {order} (Omega={gen.omega:.4g})")
    return HighFrequencyResult(
        times=np.append(times, gen.period),
        order=order,
        constant_parts=constants,
        oscillating_parts=[_close(part) for part in oscillating],
        assembled=_close(assembled),
    )


def weak_power_reflection(model: QubitModel, n_grid: int = 8192) -> WeakPowerResult:
    """
    Linear-response coherence of the qubit

        s2(t) = -i sqrt(pi f) exp(-F(t)) int_{-inf}^t exp(F(t')) g*(t') dt'
        F(t) = int_0^t [gamma(t')/2 - i delta(t')] dt'

    The lower limit is summed over past periods as a geometric series.
    """
    period = model.period
    times = period_grid(period, n_grid)
    grid = times[:-1]

    rate = model.rate(grid) * np.ones(len(grid))
    detuning = np.real(model.detuning(grid)) * np.ones(len(grid))
    integrand = 0.5 * rate - 1j * detuning
    mean = period_average(integrand)
    ripple = zero_mean_antiderivative(integrand, period)
    exponent = mean * times + _close(ripple - ripple[0])

    scale = abs(0.5 * np.mean(rate) - 1j * np.mean(detuning))
    if model.flux > WEAK_POWER_RATIO * scale:
        logger.warning(
            f"Weak-power formula used outside its range: f={model.flux:.3g} vs |gamma/2 - i delta|={scale:.3g}"
        )
    if model.flux == 0:
        return WeakPowerResult(times=times, s2=np.zeros(len(times), dtype=complex))

    coupling = np.conj(model.g(times)) * np.ones(len(times))
    step = times[1] - times[0]
    memory = np.zeros(len(times), dtype=complex)
    for k in range(1, len(times)):
        decay = np.exp(exponent[k - 1] - exponent[k])
        memory[k] = decay * memory[k - 1] + 0.5 * step * (decay * coupling[k - 1] + coupling[k])

    history = memory[-1] / (1.0 - np.exp(-exponent[-1]))
    s2 = -1j * model.drive_scale * (memory + np.exp(-exponent) * history)
    return WeakPowerResult(times=times, s2=s2)
