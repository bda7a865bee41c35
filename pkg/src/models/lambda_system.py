"""
Three-level Lambda system: probe on g<->e from the waveguide, control drive F(t) on s<->e

States: |0> = g, |1> = e, |2> = s. Basis order:
(P_e, P_s, sigma+_g, sigma-_g, sigma+_s, sigma-_s, sigma+_r, sigma-_r)
"""

import logging
from dataclasses import dataclass, field

import numpy as np

from .base import BaseModel
from .waveforms import Waveform
from ..core.liouvillian import (
    BasisDescriptor,
    HamiltonianTerm,
    LindbladSpec,
    PeriodicGenerator,
)
from ..utils.constants import MODEL_LAMBDA

logger = logging.getLogger(__name__)


def _projector(i: int, j: int) -> np.ndarray:
    matrix = np.zeros((3, 3), dtype=complex)
    matrix[i, j] = 1.0
    return matrix


SIGMA_MINUS_G = _projector(0, 1)  # |g><e|
SIGMA_PLUS_G = _projector(1, 0)
SIGMA_MINUS_S = _projector(2, 1)  # |s><e|
SIGMA_PLUS_S = _projector(1, 2)
POPULATION_E = _projector(1, 1)
POPULATION_S = _projector(2, 2)

LAMBDA_BASIS = BasisDescriptor(
    dimension=3,
    elements=((1, 1), (2, 2), (0, 1), (1, 0), (2, 1), (1, 2), (0, 2), (2, 0)),
    scales=(1.0,) * 8,
    labels=(
        'P_e', 'P_s',
        'sigma_plus_g', 'sigma_minus_g',
        'sigma_plus_s', 'sigma_minus_s',
        'sigma_plus_r', 'sigma_minus_r',
    ),
)


@dataclass(frozen=True)
class LambdaModel(BaseModel):
    """
    Lambda system with a modulated control drive

    Attributes:
        flux: Probe flux f
        gamma: Decay rate of e -> g into the waveguide
        drive: Control Rabi amplitude F(t)
        delta1: omega0 - omega_e
        delta2: omega_d - (omega_e - omega_s)
    """
    flux: float
    gamma: float = 1.0
    drive: Waveform = field(default_factory=lambda: Waveform.constant(0.0))
    delta1: float = 0.0
    delta2: float = 0.0

    kind = MODEL_LAMBDA

    def __post_init__(self):
        if self.flux < 0:
            raise ValueError(f"Probe flux must be nonnegative, got {self.flux}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def probe_coupling(self) -> float:
        """sqrt(gamma f / 2)"""
        return float(np.sqrt(self.gamma * self.flux / 2.0))

    def lindblad_spec(self) -> LindbladSpec:
        static = -self.delta1 * POPULATION_E - (self.delta1 - self.delta2) * POPULATION_S \
            + self.probe_coupling * (SIGMA_PLUS_G + SIGMA_MINUS_G)
        terms = (
            HamiltonianTerm(static, None, "static"),
            HamiltonianTerm(SIGMA_PLUS_S, lambda t: self.drive(t), "control"),
            HamiltonianTerm(SIGMA_MINUS_S, lambda t: np.conj(self.drive(t)), "control_conj"),
        )
        gamma = self.gamma
        return LindbladSpec(
            dimension=3,
            hamiltonian_terms=terms,
            jump=SIGMA_MINUS_G,
            rate=lambda t: gamma,
            period=self.period,
            basis=LAMBDA_BASIS,
            static=self.is_static,
        )

    @property
    def lowering_operator(self) -> np.ndarray:
        return SIGMA_MINUS_G

    @property
    def emitter_component(self) -> int:
        return LAMBDA_BASIS.index((1, 0))

    @property
    def raising_component(self) -> int:
        return LAMBDA_BASIS.index((0, 1))

    def emission_amplitude(self, t):
        """l = -i sqrt(gamma/2)"""
        value = -1j * np.sqrt(self.gamma / 2.0)
        return np.full(np.shape(t), value) if np.ndim(t) else value


def lambda_generator(model: LambdaModel) -> PeriodicGenerator:
    """Reduced 8x8 generator of the Lambda system"""
    generator = model.generator()
    logger.debug(f"Lambda generator built: f={model.flux}, static={model.is_static}")
    return generator
