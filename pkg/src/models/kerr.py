"""
Driven Kerr cavity in a truncated Fock space

H = -delta(t) b^+b + (U/2) b^+b^+bb + sqrt(gamma f)(b + b^+), jump b at rate gamma.
Reduced vector uses column-stacked Fock matrix elements with rho_00 eliminated.
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Tuple

import numpy as np

from .base import BaseModel
from .waveforms import Waveform
from ..core.exceptions import TruncationError
from ..core.liouvillian import (
    HamiltonianTerm,
    LindbladSpec,
    PeriodicGenerator,
    column_stacked_basis,
    devectorize,
)
from ..utils.constants import (
    DEFAULT_N_MAX,
    MODEL_KERR,
    TRUNCATION_CAP,
    TRUNCATION_STEP,
    TRUNCATION_TOL,
)

logger = logging.getLogger(__name__)


def annihilation(n_max: int) -> np.ndarray:
    """b on Fock states |0> ... |n_max>"""
    return np.diag(np.sqrt(np.arange(1, n_max + 1, dtype=float)), k=1).astype(complex)


@dataclass(frozen=True)
class KerrModel(BaseModel):
    """
    Kerr cavity with modulated detuning

    Attributes:
        flux: Input flux f
        interaction: Kerr interaction U
        gamma: Cavity decay rate
        detuning: delta(t)
        n_max: Highest Fock state kept
    """
    flux: float
    interaction: float = 0.0
    gamma: float = 1.0
    detuning: Waveform = field(default_factory=lambda: Waveform.constant(0.0))
    n_max: int = DEFAULT_N_MAX

    kind = MODEL_KERR

    def __post_init__(self):
        if self.n_max < 2:
            raise ValueError(f"n_max must be >= 2, got {self.n_max}")
        if self.flux < 0:
            raise ValueError(f"Input flux must be nonnegative, got {self.flux}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def dimension(self) -> int:
        return self.n_max + 1

    @property
    def lowering_operator(self) -> np.ndarray:
        return annihilation(self.n_max)

    @property
    def number_operator(self) -> np.ndarray:
        return np.diag(np.arange(self.dimension, dtype=float)).astype(complex)

    def lindblad_spec(self) -> LindbladSpec:
        b = self.lowering_operator
        number = self.number_operator
        n = np.arange(self.dimension, dtype=float)
        static = 0.5 * self.interaction * np.diag(n * (n - 1)).astype(complex) \
            + np.sqrt(self.gamma * self.flux) * (b + b.conj().T)
        terms = (
            HamiltonianTerm(static, None, "kerr_and_drive"),
            HamiltonianTerm(number, lambda t: -np.real(self.detuning(t)), "detuning"),
        )
        gamma = self.gamma
        return LindbladSpec(
            dimension=self.dimension,
            hamiltonian_terms=terms,
            jump=b,
            rate=lambda t: gamma,
            period=self.period,
            basis=column_stacked_basis(self.dimension),
            static=self.is_static,
        )


def kerr_generator(model: KerrModel) -> PeriodicGenerator:
    """Reduced generator with D = (n_max + 1)^2 - 1"""
    generator = model.generator()
    logger.debug(f"Kerr generator built: n_max={model.n_max}, D={generator.dimension}")
    return generator


def coherent_amplitude(model: KerrModel, detuning: float) -> complex:
    """Linear-cavity (U = 0) steady-state amplitude sqrt(gamma f)/(delta + i gamma/2)"""
    return np.sqrt(model.gamma * model.flux) / (detuning + 0.5j * model.gamma)


def static_steady_state(model: KerrModel, t: float = 0.0) -> np.ndarray:
    """Density matrix of -A^-1 C with parameters frozen at time t"""
    generator = kerr_generator(model.frozen(t))
    vector = generator.solve(0.0, -generator.C(0.0))
    return devectorize(vector, generator.basis)


def top_population(rho: np.ndarray) -> float:
    """Population of the two highest Fock states"""
    diagonal = np.real(np.diag(rho))
    return float(diagonal[-1] + diagonal[-2])


def _probe_times(model: KerrModel, samples: int = 9) -> np.ndarray:
    if model.is_static:
        return np.array([0.0])
    return np.linspace(0.0, model.period, samples, endpoint=False)


def ensure_truncation(
    model: KerrModel,
    tol: float = TRUNCATION_TOL,
    step: int = TRUNCATION_STEP,
    cap: int = TRUNCATION_CAP
) -> Tuple[KerrModel, Dict[str, float]]:
    """
    Raise n_max until the top-two-level population is below tol

    The check uses the static steady state at the most-occupied detuning
    visited by the protocol.

    Returns:
        (model with converged n_max, diagnostics)

    Raises:
        TruncationError: still unconverged at the cap
    """
    current = model
    while True:
        occupations = []
        for t in _probe_times(current):
            rho = static_steady_state(current, t)
            occupations.append((float(np.real(np.trace(current.number_operator @ rho))), rho))
        occupation, rho = max(occupations, key=lambda item: item[0])
        population = top_population(rho)

        if population < tol:
            if current.n_max != model.n_max:
                logger.info(f"Kerr truncation escalated: n_max {model.n_max} -> {current.n_max}")
            return current, {
                'n_max': current.n_max,
                'top_population': population,
                'peak_static_occupation': occupation,
            }

        if current.n_max + step > cap:
            raise TruncationError(
                "models",
                f"Fock truncation not converged at n_max={current.n_max} "
                f"(top population {population:.3e} >= {tol:.1e})"
            )
        logger.warning(
            f"Top Fock population {population:.3e} at n_max={current.n_max}, escalating by {step}"
        )
        current = replace(current, n_max=current.n_max + step)
