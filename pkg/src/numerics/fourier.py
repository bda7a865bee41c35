"""
Fourier tools for T-periodic samples on a uniform grid

Convention: X(t) = sum_m X^(m) exp(-i m Omega t), so that
X^(m) = (1/T) int_0^T X(t) exp(i m Omega t) dt.
"""

import logging
from typing import Dict, Union

import numpy as np

from .ode import Trajectory

logger = logging.getLogger(__name__)

GRID_TOLERANCE = 1e-9


def period_grid(period: float, n_samples: int) -> np.ndarray:
    """Uniform grid on [0, T] with n_samples intervals (endpoint included)"""
    if n_samples < 2:
        raise ValueError(f"Need at least 2 samples per period, got {n_samples}")
    return np.linspace(0.0, period, n_samples + 1)


def periodic_samples(times: np.ndarray, samples: np.ndarray, period: float) -> np.ndarray:
    """
    Validate a uniform grid and return the samples covering [0, T)

    A trailing sample at t0 + T is dropped.

    Raises:
        ValueError: non-uniform grid
    """
    times = np.asarray(times, dtype=float)
    samples = np.asarray(samples)
    if len(times) < 2:
        raise ValueError("Need at least two samples")
    steps = np.diff(times)
    if np.max(np.abs(steps - steps[0])) > GRID_TOLERANCE * max(period, 1.0):
        raise ValueError("Fourier analysis requires a uniform grid")
    if abs(times[-1] - times[0] - period) <= GRID_TOLERANCE * max(period, 1.0):
        return samples[:-1]
    if abs(len(times) * steps[0] - period) > GRID_TOLERANCE * max(period, 1.0):
        raise ValueError("Samples do not cover exactly one period")
    return samples


def harmonics(n_samples: int) -> np.ndarray:
    """Harmonic index m stored at each FFT position"""
    return np.rint(np.fft.fftfreq(n_samples, d=1.0 / n_samples)).astype(int)


def fourier_coefficients(
    samples: Union[Trajectory, np.ndarray],
    m_max: int,
    period: float = None,
    times: np.ndarray = None
) -> Dict[int, np.ndarray]:
    """
    Fourier coefficients X^(m) for |m| <= m_max

    Args:
        samples: Trajectory over one period, or an array of samples on [0, T)
        m_max: Highest harmonic
        period: Period T (defaults to the trajectory span)
        times: Sample times when passing a bare array

    Returns:
        Mapping m -> coefficient (scalar or array matching one sample)

    Raises:
        ValueError: non-uniform grid or too few samples
    """
    if isinstance(samples, Trajectory):
        times = samples.times
        values = samples.states
        if period is None:
            period = float(times[-1] - times[0])
    else:
        values = np.asarray(samples)
        if period is None:
            raise ValueError("period is required for bare sample arrays")
        if times is None:
            times = np.arange(len(values)) * (period / len(values))

    values = periodic_samples(times, values, period)
    n_samples = len(values)
    if n_samples < 2 * m_max + 2:
        raise ValueError(f"{n_samples} samples cannot resolve m_max={m_max}")

    # phase shift when the grid does not start at zero
    start = float(np.asarray(times)[0])
    spectrum = np.fft.ifft(values, axis=0)
    omega = 2.0 * np.pi / period
    coefficients = {}
    for m in range(-m_max, m_max + 1):
        coefficient = spectrum[m % n_samples]
        if start != 0.0:
            coefficient = coefficient * np.exp(1j * m * omega * start)
        coefficients[m] = coefficient
    return coefficients


def evaluate_fourier(coefficients: Dict[int, np.ndarray], period: float, t: np.ndarray) -> np.ndarray:
    """Evaluate sum_m X^(m) exp(-i m Omega t) at times t"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    omega = 2.0 * np.pi / period
    first = np.asarray(next(iter(coefficients.values())))
    result = np.zeros((len(t),) + first.shape, dtype=complex)
    for m, coefficient in coefficients.items():
        phase = np.exp(-1j * m * omega * t)
        result += phase.reshape((-1,) + (1,) * first.ndim) * coefficient
    return result


def spectral_derivative(samples: np.ndarray, period: float) -> np.ndarray:
    """
    Time derivative of periodic samples on [0, T) by FFT

    The Nyquist mode carries no derivative information and is dropped.
    """
    samples = np.asarray(samples)
    n_samples = samples.shape[0]
    m = harmonics(n_samples).astype(float)
    if n_samples % 2 == 0:
        m[n_samples // 2] = 0.0
    omega = 2.0 * np.pi / period
    factor = (-1j * omega * m).reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.fft.fft(factor * np.fft.ifft(samples, axis=0), axis=0)


def zero_mean_antiderivative(samples: np.ndarray, period: float) -> np.ndarray:
    """
    Periodic antiderivative with zero time average

    For zero-mean input this equals int_0^t f - <int_0^t f>. A nonzero mean is
    discarded.
    """
    samples = np.asarray(samples)
    n_samples = samples.shape[0]
    m = harmonics(n_samples).astype(float)
    if n_samples % 2 == 0:
        m[n_samples // 2] = 0.0
    omega = 2.0 * np.pi / period
    with np.errstate(divide="ignore", invalid="ignore"):
        factor = np.where(m == 0.0, 0.0, 1.0 / (-1j * omega * np.where(m == 0.0, 1.0, m)))
    factor = factor.reshape((-1,) + (1,) * (samples.ndim - 1))
    return np.fft.fft(factor * np.fft.ifft(samples, axis=0), axis=0)


def period_average(samples: np.ndarray) -> np.ndarray:
    """Uniform-grid quadrature of samples covering [0, T)"""
    return np.mean(np.asarray(samples), axis=0)


def trigonometric_interpolate(samples: np.ndarray, period: float, t: np.ndarray) -> np.ndarray:
    """
    Evaluate the trigonometric interpolant of samples on [0, T) at times t
    """
    samples = np.asarray(samples)
    n_samples = samples.shape[0]
    spectrum = np.fft.ifft(samples, axis=0)
    m = harmonics(n_samples)
    if n_samples % 2 == 0:
        # split the Nyquist term symmetrically to keep real data real
        nyquist = n_samples // 2
        half = spectrum[nyquist] / 2.0
        spectrum = np.concatenate([spectrum, half[None]], axis=0)
        spectrum[nyquist] = half
        m = np.append(m, nyquist)
        m[nyquist] = -nyquist
    omega = 2.0 * np.pi / period
    t = np.atleast_1d(np.asarray(t, dtype=float))
    phases = np.exp(-1j * omega * np.outer(t, m))
    return np.tensordot(phases, spectrum, axes=(1, 0))
