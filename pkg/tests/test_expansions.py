"""
Tests for the adiabatic, high-frequency and weak-power approximations
"""

import numpy as np
import pytest

from src.core.expansions import adiabatic_expansion, high_frequency_expansion, weak_power_reflection
from src.core.floquet import (
    fundamental_solution,
    particular_solution,
    quasi_stationary,
    solve_quasi_stationary,
)
from src.models.qubit import QubitModel
from src.models.waveforms import Waveform


def exact_state(model: QubitModel, n_grid: int):
    """Resummed state without the Floquet logarithm (long periods)"""
    gen = model.generator()
    fund = fundamental_solution(gen, n_grid)
    return quasi_stationary(fund, particular_solution(gen, n_grid), gen.basis, m_max=8)


@pytest.mark.slow
def test_adiabatic_matches_exact_away_from_quench() -> None:
    model = QubitModel(flux=1.0, coupling=Waveform.cosine(1.0, 0.01))
    gen = model.generator()
    exact = exact_state(model, 1024)
    approximation = adiabatic_expansion(gen, order=1, n_grid=1024)

    coherence = model.emitter_component
    mask = model.rate(exact.times) > 0.5
    scale = np.max(np.abs(exact.vectors[mask, coherence]))
    deviation = np.max(np.abs(approximation.result[mask, coherence] - exact.vectors[mask, coherence]))
    assert deviation < 0.01 * scale
    assert np.all(approximation.valid[mask])


def test_adiabatic_correction_improves_slow_modulation() -> None:
    # coupling never vanishes
    model = QubitModel(flux=1.0, coupling=Waveform.cosine(0.3, 0.02, offset=1.0))
    gen = model.generator()
    exact = exact_state(model, 256)
    zeroth = adiabatic_expansion(gen, order=0, n_grid=256)
    first = adiabatic_expansion(gen, order=1, n_grid=256)

    error0 = np.max(np.abs(zeroth.result - exact.vectors))
    error1 = np.max(np.abs(first.result - exact.vectors))
    assert zeroth.corrected is None
    assert error1 < 0.3 * error0
    assert not np.any(first.singular)


def test_adiabatic_flags_singular_quench_points() -> None:
    model = QubitModel(flux=1.0, coupling=Waveform.cosine(1.0, 0.1))
    result = adiabatic_expansion(model.generator(), order=1, n_grid=64)
    # the coupling vanishes at T/4 and 3T/4
    assert set(np.flatnonzero(result.singular[:-1])) == {16, 48}
    assert not np.any(result.valid[[16, 48]])
    assert np.all(np.isfinite(result.result))
    assert result.times[-1] == pytest.approx(model.period)


def test_high_frequency_matches_exact_reflection() -> None:
    model = QubitModel(flux=1.0, coupling=Waveform.cosine(1.0, 10.0))
    gen = model.generator()
    exact = solve_quasi_stationary(gen, n_grid=128, m_max=8).state
    approximation = high_frequency_expansion(gen, order=1, n_grid=128)

    ell = model.emission_amplitude(approximation.times)
    coherence = model.emitter_component
    exact_r2 = np.abs(ell * exact.at(approximation.times)[:, coherence]) ** 2 / model.flux
    approx_r2 = np.abs(ell * approximation.assembled[:, coherence]) ** 2 / model.flux
    assert np.max(np.abs(approx_r2 - exact_r2)) < 0.05 * np.max(exact_r2)


def test_high_frequency_parts_have_zero_mean() -> None:
    model = QubitModel(flux=1.0, coupling=Waveform.offset_cosine(0.5, 8.0))
    result = high_frequency_expansion(model.generator(), order=2, n_grid=64)
    assert len(result.constant_parts) == 3
    assert len(result.oscillating_parts) == 2
    for part in result.oscillating_parts:
        np.testing.assert_allclose(np.mean(part[:-1], axis=0), 0.0, atol=1e-10)
    np.testing.assert_allclose(result.assembled[0], result.assembled[-1])


def test_weak_power_matches_exact_coherence() -> None:
    model = QubitModel(flux=1e-5, coupling=Waveform.cosine(1.0, 0.1))
    exact = exact_state(model, 2048)
    weak = weak_power_reflection(model, n_grid=2048)

    coherence = exact.vectors[:, model.emitter_component]
    np.testing.assert_allclose(weak.times, exact.times)
    assert np.max(np.abs(weak.s2 - coherence)) < 1e-3 * np.max(np.abs(coherence))


def test_weak_power_static_limit() -> None:
    flux = 1e-6
    model = QubitModel(flux=flux)
    weak = weak_power_reflection(model, n_grid=64)
    # resonant linear response: -i sqrt(gamma f) / (gamma / 2)
    np.testing.assert_allclose(weak.s2, -2j * np.sqrt(flux), rtol=1e-4)


@pytest.mark.parametrize("order", [-1, 2])
def test_adiabatic_rejects_order(modulated_qubit, order) -> None:
    with pytest.raises(ValueError):
        adiabatic_expansion(modulated_qubit.generator(), order=order, n_grid=16)


def test_high_frequency_rejects_order(modulated_qubit) -> None:
    with pytest.raises(ValueError):
        high_frequency_expansion(modulated_qubit.generator(), order=0, n_grid=16)
