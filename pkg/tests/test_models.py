"""
Tests for waveforms, the model registry and the Kerr truncation policy
"""

import math

import numpy as np
import pytest

from src.core.exceptions import TruncationError
from src.core.floquet import solve_quasi_stationary
from src.core.liouvillian import devectorize
from src.models.kerr import KerrModel, coherent_amplitude, ensure_truncation, kerr_generator, static_steady_state
from src.models.lambda_system import LAMBDA_BASIS, LambdaModel, lambda_generator
from src.models.qubit import QubitModel, qubit_generator
from src.models.registry import build_model, model_parameters, required_parameters
from src.models.waveforms import Waveform, protocol_frequency, waveform_from_value
from src.observables.amplitudes import reflection_transmission


class TestWaveform:

    def test_cosine_and_offset_cosine(self) -> None:
        t = np.array([0.0, np.pi / 2, np.pi])
        np.testing.assert_allclose(Waveform.cosine(2.0, 1.0)(t), [2.0, 0.0, -2.0], atol=1e-15)
        np.testing.assert_allclose(Waveform.offset_cosine(0.5, 1.0)(t), [1.0, 0.5, 0.0], atol=1e-15)

    def test_means(self) -> None:
        assert Waveform.constant(3.0).mean() == 3.0
        assert Waveform.cosine(2.0, 1.0, offset=0.5).mean() == 0.5
        assert Waveform.offset_cosine(10.0, 0.1).mean() == 10.0

    def test_frozen_waveform(self) -> None:
        frozen = Waveform.cosine(1.0, 2.0).frozen(np.pi / 2)
        assert frozen.is_static
        assert frozen(7.0) == pytest.approx(np.cos(np.pi))

    def test_period(self) -> None:
        assert Waveform.cosine(1.0, 0.1).period == pytest.approx(20.0 * np.pi)
        assert math.isinf(Waveform.constant(1.0).period)

    def test_rejects_bad_definitions(self) -> None:
        with pytest.raises(ValueError):
            Waveform(kind='square', amplitude=1.0, frequency=1.0)
        with pytest.raises(ValueError):
            Waveform.cosine(1.0, 0.0)

    def test_from_config_value(self) -> None:
        assert waveform_from_value(2.5) == Waveform.constant(2.5)
        assert waveform_from_value([1.0, -1.0]).amplitude == complex(1.0, -1.0)
        waveform = waveform_from_value({'kind': 'offset_cosine', 'amplitude': 10.0, 'frequency': 0.1})
        assert waveform == Waveform.offset_cosine(10.0, 0.1)
        assert waveform_from_value(waveform.to_value()) == waveform

    @pytest.mark.parametrize("value", [
        {'kind': 'cosine', 'frequency': 1.0},
        {'kind': 'cosine', 'amplitude': 1.0, 'frequency': 1.0, 'shape': 'x'},
        True,
        "fast",
    ])
    def test_from_config_value_errors(self, value) -> None:
        with pytest.raises(ValueError):
            waveform_from_value(value)


def test_protocol_frequency() -> None:
    waveforms = [Waveform.cosine(1.0, 0.5), Waveform.constant(1.0), Waveform.cosine(1.0, 1.5)]
    assert protocol_frequency(waveforms) == 0.5
    assert protocol_frequency([Waveform.constant(1.0)]) == 0.0


def test_protocol_frequency_rejects_incommensurate() -> None:
    with pytest.raises(ValueError, match="unit-inconsistent"):
        protocol_frequency([Waveform.cosine(1.0, 1.0), Waveform.cosine(1.0, np.sqrt(2.0))])


class TestRegistry:

    def test_model_parameters(self) -> None:
        assert model_parameters('qubit') == {
            'flux': False, 'gamma': False, 'coupling': True, 'detuning': True, 'omega0': False,
        }
        assert 'n_max' not in model_parameters('kerr')
        assert required_parameters('lambda') == {'flux'}

    def test_build_model_wraps_static_values(self) -> None:
        model = build_model('qubit', {'flux': 2.0, 'detuning': 0.5}, {'coupling': Waveform.cosine(1.0, 0.1)})
        assert model.detuning == Waveform.constant(0.5)
        assert model.omega == pytest.approx(0.1)
        assert not model.is_static

    def test_build_kerr_with_truncation(self) -> None:
        model = build_model('kerr', {'flux': 1.0, 'interaction': -0.5}, {}, n_max=12)
        assert isinstance(model, KerrModel)
        assert model.dimension == 13

    def test_unknown_kind(self) -> None:
        with pytest.raises(ValueError):
            build_model('transmon', {'flux': 1.0}, {})


class TestQubit:

    def test_generator_size(self) -> None:
        gen = qubit_generator(QubitModel(flux=1.0))
        assert gen.dimension == 3
        assert gen.is_static

    def test_coupling_phase_is_a_gauge(self) -> None:
        phase = np.exp(0.7j)
        plain = QubitModel(flux=2.0, coupling=Waveform.cosine(1.0, 0.5))
        rotated = QubitModel(flux=2.0, coupling=Waveform.cosine(phase, 0.5))
        reflectance = []
        for model in (plain, rotated):
            state = solve_quasi_stationary(qubit_generator(model), n_grid=64, m_max=4,
                                           grid_convergence=False).state
            reflectance.append(reflection_transmission(model, state).reflectance)
        np.testing.assert_allclose(reflectance[1], reflectance[0], atol=1e-7)


class TestLambda:

    def test_generator_matches_model(self, eit_lambda) -> None:
        gen = lambda_generator(eit_lambda)
        assert gen.dimension == 8
        np.testing.assert_allclose(gen.C(0.0), eit_lambda.generator().C(0.0))

    def test_transparent_on_two_photon_resonance(self, eit_lambda) -> None:
        solution = solve_quasi_stationary(eit_lambda.generator(), n_grid=8, m_max=1)
        trace = reflection_transmission(eit_lambda, solution.state)
        assert abs(trace.transmittance[0] - 1.0) < 1e-4

    def test_dark_state_populates_s(self, eit_lambda) -> None:
        gen = eit_lambda.generator()
        rho = devectorize(gen.solve(0.0, -gen.C(0.0)), LAMBDA_BASIS)
        assert rho[1, 1].real < 1e-10
        assert rho[2, 2].real == pytest.approx(eit_lambda.probe_coupling ** 2 / (100.0 + eit_lambda.probe_coupling ** 2))

    def test_negative_flux_rejected(self) -> None:
        with pytest.raises(ValueError):
            LambdaModel(flux=-1.0)


class TestKerr:

    def test_generator_size(self, small_kerr) -> None:
        gen = kerr_generator(small_kerr)
        assert gen.dimension == 25 ** 2 - 1
        assert gen.is_static

    def test_linear_cavity_is_coherent(self, small_kerr) -> None:
        rho = static_steady_state(small_kerr)
        b = small_kerr.lowering_operator
        alpha = coherent_amplitude(small_kerr, 0.0)
        assert np.trace(b @ rho) == pytest.approx(alpha, abs=1e-8)
        assert np.trace(small_kerr.number_operator @ rho).real == pytest.approx(4.0, abs=1e-8)

    def test_detuned_occupation(self) -> None:
        model = KerrModel(flux=1.0, detuning=Waveform.constant(-2.0), n_max=16)
        rho = static_steady_state(model)
        expected = model.flux / (4.0 + 0.25)
        assert np.trace(model.number_operator @ rho).real == pytest.approx(expected, rel=1e-8)

    def test_truncation_escalates(self) -> None:
        model, diagnostics = ensure_truncation(KerrModel(flux=1.0, n_max=10))
        assert model.n_max > 10
        assert (model.n_max - 10) % 8 == 0
        assert diagnostics['top_population'] < 1e-8
        assert diagnostics['n_max'] == model.n_max

    def test_truncation_kept_when_converged(self, small_kerr) -> None:
        model, diagnostics = ensure_truncation(small_kerr)
        assert model.n_max == small_kerr.n_max
        assert diagnostics['peak_static_occupation'] == pytest.approx(4.0, abs=1e-6)

    def test_truncation_cap(self) -> None:
        with pytest.raises(TruncationError):
            ensure_truncation(KerrModel(flux=1.0, n_max=10), cap=12)

    def test_invalid_truncation(self) -> None:
        with pytest.raises(ValueError):
            KerrModel(flux=1.0, n_max=1)
