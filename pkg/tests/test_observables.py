"""
Tests for amplitudes, fluxes, spectra, correlations and Kerr observables
"""

import numpy as np
import pytest

from src.core.exceptions import TruncationError
from src.core.floquet import solve_quasi_stationary
from src.models.kerr import KerrModel
from src.models.qubit import QubitModel
from src.models.waveforms import Waveform
from src.numerics.fourier import period_average, spectral_derivative
from src.observables.amplitudes import output_fluxes, power_conservation, reflection_transmission
from src.observables.correlations import g1_correlation, g2_correlation
from src.observables.kerr import kerr_observables, shoelace_area, von_neumann_entropy
from src.observables.scan import static_scan
from src.observables.spectra import elastic_spectrum, inelastic_spectrum, spectrum_density


class TestAmplitudes:

    def test_static_reflectance(self, static_qubit, static_qubit_solution) -> None:
        trace = reflection_transmission(static_qubit, static_qubit_solution.state)
        # |R|^2 = 1 / (1 + 8f)^2 on resonance
        np.testing.assert_allclose(trace.reflectance, 1.0 / 81.0, rtol=1e-10)
        np.testing.assert_allclose(trace.T, 1.0 + trace.R)

    def test_weak_drive_reflects_fully(self) -> None:
        model = QubitModel(flux=1e-6)
        state = solve_quasi_stationary(model.generator(), n_grid=8, m_max=1).state
        trace = reflection_transmission(model, state)
        assert trace.R[0] == pytest.approx(-1.0, abs=1e-4)
        assert trace.transmittance[0] < 1e-8

    def test_zero_flux_is_rejected(self) -> None:
        model = QubitModel(flux=0.0)
        state = solve_quasi_stationary(model.generator(), n_grid=8, m_max=1).state
        with pytest.raises(ValueError):
            reflection_transmission(model, state)

    def test_power_conservation_under_modulation(self, modulated_qubit, modulated_qubit_solution) -> None:
        fluxes = output_fluxes(modulated_qubit, modulated_qubit_solution.state)
        summary = power_conservation(fluxes)
        assert summary['residual'] < 1e-6
        assert summary['mean_left'] + summary['mean_right'] == pytest.approx(modulated_qubit.flux, rel=1e-6)
        assert np.all(fluxes.inelastic > -1e-12)

    def test_fluxes_split_into_elastic_and_inelastic(self, on_off_qubit, on_off_qubit_solution) -> None:
        fluxes = output_fluxes(on_off_qubit, on_off_qubit_solution.state)
        np.testing.assert_allclose(fluxes.left, fluxes.elastic_left + fluxes.inelastic)
        np.testing.assert_allclose(fluxes.right, fluxes.elastic_right + fluxes.inelastic)

    def test_flux_excess_tracks_half_population_change(self, on_off_qubit, on_off_qubit_solution) -> None:
        state = on_off_qubit_solution.state
        fluxes = output_fluxes(on_off_qubit, state)
        excited = np.real(state.density_matrices()[:-1, 1, 1])
        excess = (fluxes.left + fluxes.right - on_off_qubit.flux)[:-1]
        np.testing.assert_allclose(excess, -0.5 * spectral_derivative(excited, state.period), atol=1e-6)


class TestSpectra:

    @pytest.mark.parametrize("channel", ["L", "R"])
    def test_elastic_weights_sum_to_elastic_flux(self, modulated_qubit, modulated_qubit_solution, channel) -> None:
        state = modulated_qubit_solution.state
        trace = reflection_transmission(modulated_qubit, state)
        spectrum = elastic_spectrum(trace, channel)
        fluxes = output_fluxes(modulated_qubit, state)
        elastic = fluxes.elastic_left if channel == 'L' else fluxes.elastic_right
        assert sum(spectrum.elastic_weights.values()) == pytest.approx(period_average(elastic[:-1]), rel=1e-6)
        assert all(line.weight >= 0 for line in spectrum.elastic)

    def test_inelastic_weight_equals_inelastic_flux(self, modulated_qubit, modulated_qubit_solution) -> None:
        solution = modulated_qubit_solution
        spectrum = inelastic_spectrum(modulated_qubit, solution.state, solution.decomposition)
        assert spectrum.inelastic_weight.real == pytest.approx(spectrum.mean_inelastic_flux, rel=1e-4)
        assert abs(spectrum.inelastic_weight.imag) < 1e-6
        assert all(term.half_width > 0 for term in spectrum.inelastic)

    def test_static_mollow_sidebands(self) -> None:
        flux = 200.0
        model = QubitModel(flux=flux)
        solution = solve_quasi_stationary(model.generator(), n_grid=16, m_max=2)
        spectrum = inelastic_spectrum(model, solution.state, solution.decomposition)

        rabi = 2.0 * np.sqrt(flux)
        sidebands = [term.position for term in spectrum.inelastic
                     if term.harmonic == 0 and abs(term.weight) > 1e-6 and abs(term.position) > 1.0]
        assert sidebands
        for position in sidebands:
            assert abs(position) == pytest.approx(rabi, rel=0.02)

        frequencies = np.linspace(-60.0, 60.0, 1201)
        density, residual = spectrum_density(spectrum, frequencies)
        assert residual < 1e-9
        assert np.min(density) > -1e-9 * np.max(density)
        # side peak above the valley between peaks
        side = density[np.argmin(np.abs(frequencies - rabi))]
        valley = density[np.argmin(np.abs(frequencies - rabi / 2.0))]
        assert side > valley

    def test_unknown_channel(self, static_qubit, static_qubit_solution) -> None:
        trace = reflection_transmission(static_qubit, static_qubit_solution.state)
        with pytest.raises(ValueError):
            elastic_spectrum(trace, 'X')


class TestCorrelations:

    @pytest.mark.parametrize("channel", ["L", "R"])
    def test_g1_at_zero_delay_is_the_flux(self, modulated_qubit, modulated_qubit_solution, channel) -> None:
        state = modulated_qubit_solution.state
        result = g1_correlation(modulated_qubit, state, tau_grid=[0.0, 0.5, 1.0], channel=channel, n_tau_c=8)
        fluxes = output_fluxes(modulated_qubit, state, correlations=result)
        reference = fluxes.left if channel == 'L' else fluxes.right
        expected = np.interp(result.tau_c, state.times, reference)
        np.testing.assert_allclose(result.values[0], expected, atol=1e-10)
        assert fluxes.correlation_mismatch < 1e-8
        assert result.values.shape == (3, 8)

    def test_g1_negative_delay_is_conjugate(self, static_qubit, static_qubit_solution) -> None:
        result = g1_correlation(static_qubit, static_qubit_solution.state, tau_grid=[-0.7, 0.0, 0.7], n_tau_c=1)
        np.testing.assert_allclose(result.inelastic[0], np.conj(result.inelastic[2]))

    def test_g1_floquet_route_agrees(self, modulated_qubit, modulated_qubit_solution) -> None:
        solution = modulated_qubit_solution
        taus = np.linspace(0.0, 3.0, 7)
        integrated = g1_correlation(modulated_qubit, solution.state, tau_grid=taus, n_tau_c=4)
        resummed = g1_correlation(modulated_qubit, solution.state, floq=solution.decomposition,
                                  tau_grid=taus, n_tau_c=4, method='floquet')
        np.testing.assert_allclose(resummed.values, integrated.values, atol=1e-6)

    def test_g1_floquet_route_needs_decomposition(self, static_qubit, static_qubit_solution) -> None:
        with pytest.raises(ValueError):
            g1_correlation(static_qubit, static_qubit_solution.state, method='floquet')

    def test_g2_antibunching_and_factorization(self, static_qubit, static_qubit_solution) -> None:
        result = g2_correlation(static_qubit, static_qubit_solution.state, tau_grid=[0.0, 20.0], n_tau_c=1)
        assert result.values.shape == (2, 1)
        assert result.values[0, 0] == pytest.approx(0.0, abs=1e-10)
        assert result.values[1, 0] == pytest.approx(1.0, abs=1e-3)
        assert result.imaginary_residual < 1e-10

    def test_g2_undefined_where_flux_vanishes(self, modulated_qubit, modulated_qubit_solution) -> None:
        result = g2_correlation(modulated_qubit, modulated_qubit_solution.state, tau_grid=[0.0, 0.4], n_tau_c=4, workers=2)
        # sign-change coupling is off at T/4 and 3T/4
        assert np.all(result.undefined[:, 1])
        assert np.all(np.isnan(result.values[result.undefined]))
        assert np.all(np.isfinite(result.values[~result.undefined]))

    def test_correlations_need_a_qubit(self, eit_lambda) -> None:
        state = solve_quasi_stationary(eit_lambda.generator(), n_grid=8, m_max=1).state
        with pytest.raises(ValueError):
            g2_correlation(eit_lambda, state)


class TestKerrObservables:

    def test_entropy(self) -> None:
        np.testing.assert_allclose(von_neumann_entropy(np.array([[1.0, 0.0], [0.5, 0.5]])), [0.0, np.log(2.0)])

    def test_entropy_rejects_negative_eigenvalues(self) -> None:
        with pytest.raises(TruncationError):
            von_neumann_entropy(np.array([1.01, -0.01]))

    def test_shoelace_orientation(self) -> None:
        x = np.array([0.0, 1.0, 1.0, 0.0])
        y = np.array([0.0, 0.0, 1.0, 1.0])
        assert shoelace_area(x, y) == pytest.approx(1.0)
        assert shoelace_area(x[::-1], y[::-1]) == pytest.approx(-1.0)

    def test_static_coherent_state(self, small_kerr) -> None:
        state = solve_quasi_stationary(small_kerr.generator(), n_grid=8, m_max=1).state
        observables = kerr_observables(state, small_kerr)
        np.testing.assert_allclose(observables.occupation, 4.0, atol=1e-8)
        assert np.max(observables.entropy) < 1e-3
        assert observables.loop_area == 0.0

    @pytest.mark.slow
    def test_modulated_detuning_opens_a_loop(self) -> None:
        model = KerrModel(flux=0.25, detuning=Waveform.cosine(2.0, 1.0, offset=1.0), n_max=8)
        state = solve_quasi_stationary(model.generator(), n_grid=64, m_max=4).state
        observables = kerr_observables(state, model)
        assert abs(observables.loop_area) > 1e-4
        assert observables.peak_occupation > 0.0
        assert np.all(observables.entropy >= 0.0)


class TestStaticScan:

    def test_qubit_reflectance(self, static_qubit) -> None:
        result = static_scan(static_qubit, 'flux', [1.0, 10.0])
        np.testing.assert_allclose(result.columns['reflectance'], [1.0 / 81.0, 1.0 / 81.0 ** 2], rtol=1e-10)
        assert np.all(result.gamma_min > 0)

    def test_kerr_occupation(self, small_kerr) -> None:
        detunings = [-2.0, 0.0, 2.0]
        result = static_scan(small_kerr, 'detuning', detunings)
        expected = [small_kerr.flux / (d ** 2 + 0.25) for d in detunings]
        np.testing.assert_allclose(result.columns['occupation'], expected, rtol=1e-8)
        assert 'entropy' in result.columns

    def test_lambda_transmittance(self, eit_lambda) -> None:
        result = static_scan(eit_lambda, 'drive', [10.0])
        assert result.columns['transmittance'][0] == pytest.approx(1.0, abs=1e-4)

    def test_unknown_parameter(self, static_qubit) -> None:
        with pytest.raises(ValueError):
            static_scan(static_qubit, 'temperature', [1.0])
