"""
Tests for ODE integration, Fourier tools and the period logarithm
"""

import numpy as np
import pytest
import scipy.linalg

from src.core.exceptions import NonDissipativeError
from src.numerics.fourier import (
    evaluate_fourier,
    fourier_coefficients,
    period_average,
    period_grid,
    spectral_derivative,
    trigonometric_interpolate,
    zero_mean_antiderivative,
)
from src.numerics.linalg import eig_biorthonormal, matrix_log_over_period, principal_log, slowest_rate
from src.numerics.ode import integrate_linear_ode

PERIOD = 2.0 * np.pi / 3.0
OMEGA = 3.0


def test_period_grid_includes_endpoint() -> None:
    grid = period_grid(PERIOD, 8)
    assert len(grid) == 9
    assert grid[0] == 0.0
    assert grid[-1] == pytest.approx(PERIOD)


def test_period_grid_needs_two_samples() -> None:
    with pytest.raises(ValueError):
        period_grid(PERIOD, 1)


def test_fourier_sign_convention() -> None:
    times = period_grid(PERIOD, 32)
    samples = np.exp(-1j * OMEGA * times) + 0.25 * np.exp(2j * OMEGA * times)
    coefficients = fourier_coefficients(samples, 4, period=PERIOD, times=times)
    assert coefficients[1] == pytest.approx(1.0)
    assert coefficients[-2] == pytest.approx(0.25)
    assert abs(coefficients[0]) < 1e-14


def test_fourier_of_cosine_and_reconstruction() -> None:
    times = period_grid(PERIOD, 64)
    samples = 1.5 + np.cos(OMEGA * times + 0.3)
    coefficients = fourier_coefficients(samples, 5, period=PERIOD, times=times)
    assert coefficients[0] == pytest.approx(1.5)
    assert coefficients[1] == pytest.approx(0.5 * np.exp(-0.3j))
    assert coefficients[-1] == pytest.approx(0.5 * np.exp(0.3j))

    probe = np.array([0.1, 0.77, 1.9])
    rebuilt = evaluate_fourier(coefficients, PERIOD, probe)
    np.testing.assert_allclose(rebuilt, 1.5 + np.cos(OMEGA * probe + 0.3), atol=1e-12)


def test_fourier_of_vector_samples() -> None:
    times = period_grid(PERIOD, 32)
    samples = np.stack([np.cos(OMEGA * times), np.sin(OMEGA * times)], axis=1)
    coefficients = fourier_coefficients(samples, 3, period=PERIOD, times=times)
    np.testing.assert_allclose(coefficients[1], [0.5, 0.5j], atol=1e-14)


def test_fourier_rejects_non_uniform_grid() -> None:
    times = np.sort(np.random.default_rng(0).uniform(0.0, PERIOD, 33))
    with pytest.raises(ValueError):
        fourier_coefficients(np.ones(33), 2, period=PERIOD, times=times)


def test_fourier_rejects_too_few_samples() -> None:
    times = period_grid(PERIOD, 8)
    with pytest.raises(ValueError):
        fourier_coefficients(np.ones(9), 4, period=PERIOD, times=times)


def test_spectral_derivative_of_sine() -> None:
    times = period_grid(PERIOD, 64)[:-1]
    derivative = spectral_derivative(np.sin(2 * OMEGA * times), PERIOD)
    np.testing.assert_allclose(derivative, 2 * OMEGA * np.cos(2 * OMEGA * times), atol=1e-10)


def test_zero_mean_antiderivative_of_cosine() -> None:
    times = period_grid(PERIOD, 64)[:-1]
    antiderivative = zero_mean_antiderivative(np.cos(OMEGA * times) + 2.0, PERIOD)
    np.testing.assert_allclose(antiderivative, np.sin(OMEGA * times) / OMEGA, atol=1e-12)
    assert abs(period_average(antiderivative)) < 1e-14


def test_trigonometric_interpolation_is_exact_for_band_limited_data() -> None:
    times = period_grid(PERIOD, 16)[:-1]
    samples = np.cos(OMEGA * times) - 0.5j * np.sin(3 * OMEGA * times)
    probe = np.linspace(0.0, PERIOD, 7)
    interpolated = trigonometric_interpolate(samples, PERIOD, probe)
    np.testing.assert_allclose(interpolated, np.cos(OMEGA * probe) - 0.5j * np.sin(3 * OMEGA * probe), atol=1e-12)


def test_integrate_decay_with_source() -> None:
    trajectory = integrate_linear_ode(
        lambda t: np.array([[-2.0]]), np.array([0.0]), (0.0, 3.0),
        inhomogeneity=lambda t: np.array([1.0]), t_eval=np.linspace(0.0, 3.0, 7),
    )
    expected = 0.5 * (1.0 - np.exp(-2.0 * trajectory.times))
    np.testing.assert_allclose(trajectory.states[:, 0], expected, atol=1e-10)
    assert trajectory.times[-1] == pytest.approx(3.0)


def test_integrate_matrix_state_matches_expm() -> None:
    generator = np.array([[-1.0, 2.0], [-2.0, -1.0]], dtype=complex)
    trajectory = integrate_linear_ode(lambda t: generator, np.eye(2), (0.0, 1.5))
    np.testing.assert_allclose(trajectory.endpoint, scipy.linalg.expm(1.5 * generator), atol=1e-9)


def test_integrate_reports_error_estimate() -> None:
    trajectory = integrate_linear_ode(
        lambda t: np.array([[-1.0 + 5j * np.cos(t)]]), np.array([1.0]), (0.0, 2.0), estimate_error=True,
    )
    assert 0.0 < trajectory.error_estimate < 1e-7


@pytest.mark.parametrize("span", [(1.0, 1.0), (2.0, 1.0)])
def test_integrate_rejects_bad_span(span) -> None:
    with pytest.raises(ValueError):
        integrate_linear_ode(lambda t: np.eye(1), np.ones(1), span)


def test_integrate_rejects_nonpositive_tolerance() -> None:
    with pytest.raises(ValueError):
        integrate_linear_ode(lambda t: np.eye(1), np.ones(1), (0.0, 1.0), rtol=0.0)


def test_eig_biorthonormal() -> None:
    matrix = np.array([[-1.0, 1.0, 0.0], [0.0, -2.0, 0.5], [0.3, 0.0, -0.5]], dtype=complex)
    eigen = eig_biorthonormal(matrix)
    assert eigen.biorthonormality_error() < 1e-12
    assert len(eigen) == 3
    np.testing.assert_allclose(eigen.reconstruct(), matrix, atol=1e-12)
    assert np.all(np.diff(eigen.values.real) <= 1e-14)


def test_period_log_recovers_generator() -> None:
    generator = np.array([[-0.5, 1.0], [-1.0, -0.7]], dtype=complex)
    monodromy = scipy.linalg.expm(PERIOD * generator)
    B = matrix_log_over_period(monodromy, PERIOD)
    np.testing.assert_allclose(scipy.linalg.expm(PERIOD * B), monodromy, atol=1e-12)
    assert slowest_rate(np.linalg.eigvals(B)) == pytest.approx(slowest_rate(np.linalg.eigvals(generator)))


def test_principal_log_folds_negative_boundary() -> None:
    exponents = principal_log(np.array([-0.5 + 0.0j]), 1.0)
    assert exponents[0].imag == pytest.approx(np.pi)


def test_principal_log_rejects_non_decaying_mode() -> None:
    with pytest.raises(NonDissipativeError) as excinfo:
        principal_log(np.array([0.5, 1.0]), 1.0)
    assert excinfo.value.modulus == pytest.approx(1.0)
    assert str(excinfo.value).startswith("numerics:")
