"""
Shared fixtures: small qubit, Lambda and Kerr problems solved once per session
"""

import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).resolve().parent.parent))

from src.core.floquet import solve_quasi_stationary
from src.models.kerr import KerrModel
from src.models.lambda_system import LambdaModel
from src.models.qubit import QubitModel
from src.models.waveforms import Waveform


@pytest.fixture(scope="session")
def static_qubit() -> QubitModel:
    return QubitModel(flux=1.0)


@pytest.fixture(scope="session")
def static_qubit_solution(static_qubit):
    return solve_quasi_stationary(static_qubit.generator(), n_grid=16, m_max=2)


@pytest.fixture(scope="session")
def modulated_qubit() -> QubitModel:
    """Sign-change coupling g0 cos(t), f = gamma"""
    return QubitModel(flux=1.0, coupling=Waveform.cosine(1.0, 1.0))


@pytest.fixture(scope="session")
def modulated_qubit_solution(modulated_qubit):
    return solve_quasi_stationary(modulated_qubit.generator(), n_grid=128, m_max=12)


@pytest.fixture(scope="session")
def on_off_qubit() -> QubitModel:
    """On-off coupling g0 (1 + cos 2t)/2"""
    return QubitModel(flux=2.0, coupling=Waveform.offset_cosine(0.5, 2.0))


@pytest.fixture(scope="session")
def on_off_qubit_solution(on_off_qubit):
    return solve_quasi_stationary(on_off_qubit.generator(), n_grid=128, m_max=12)


@pytest.fixture
def eit_lambda() -> LambdaModel:
    return LambdaModel(flux=0.01, drive=Waveform.constant(10.0))


@pytest.fixture
def small_kerr() -> KerrModel:
    return KerrModel(flux=1.0, interaction=0.0, detuning=Waveform.constant(0.0), n_max=24)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(1234)
