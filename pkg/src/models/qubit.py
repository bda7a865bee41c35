"""
Two-level emitter side-coupled to a waveguide with modulated coupling g(t)

Basis: (<sigma_+>, <sigma_->, <1 + sigma_z>) with |0> = ground, |1> = excited.
The coupling waveform is the shape g(t)/g0 with gamma = pi g0^2.
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
from ..utils.constants import MODEL_QUBIT

logger = logging.getLogger(__name__)

SIGMA_MINUS = np.array([[0.0, 1.0], [0.0, 0.0]], dtype=complex)
SIGMA_PLUS = SIGMA_MINUS.conj().T
EXCITED = np.array([[0.0, 0.0], [0.0, 1.0]], dtype=complex)

QUBIT_BASIS = BasisDescriptor(
    dimension=2,
    elements=((0, 1), (1, 0), (1, 1)),
    scales=(1.0, 1.0, 2.0),
    labels=('sigma_plus', 'sigma_minus', 'one_plus_sigma_z'),
)


@dataclass(frozen=True)
class QubitModel(BaseModel):
    """
    Qubit with modulated waveguide coupling

    Attributes:
        flux: Input photon flux f (units of gamma)
        gamma: Decay rate at unit coupling shape
        coupling: Shape g(t)/g0 (complex allowed)
        detuning: delta = omega0 - omega_e
        omega0: Working frequency, enters spectra as a label only
    """
    flux: float
    gamma: float = 1.0
    coupling: Waveform = field(default_factory=lambda: Waveform.constant(1.0))
    detuning: Waveform = field(default_factory=lambda: Waveform.constant(0.0))
    omega0: float = 0.0

    kind = MODEL_QUBIT

    def __post_init__(self):
        if self.flux < 0:
            raise ValueError(f"Input flux must be nonnegative, got {self.flux}")
        if self.gamma <= 0:
            raise ValueError(f"gamma must be positive, got {self.gamma}")

    @property
    def g0(self) -> float:
        return float(np.sqrt(self.gamma / np.pi))

    def g(self, t):
        """Coupling g(t)"""
        return self.g0 * self.coupling(t)

    def rate(self, t):
        """gamma(t) = pi |g(t)|^2"""
        return np.pi * np.abs(self.g(t)) ** 2

    @property
    def drive_scale(self) -> float:
        return float(np.sqrt(np.pi * self.flux))

    def lindblad_spec(self) -> LindbladSpec:
        drive = self.drive_scale
        terms = (
            HamiltonianTerm(EXCITED, lambda t: -self.detuning(t), "detuning"),
            HamiltonianTerm(SIGMA_MINUS, lambda t: drive * self.g(t), "drive"),
            HamiltonianTerm(SIGMA_PLUS, lambda t: drive * np.conj(self.g(t)), "drive_conj"),
        )
        return LindbladSpec(
            dimension=2,
            hamiltonian_terms=terms,
            jump=SIGMA_MINUS,
            rate=lambda t: float(self.rate(t)),
            period=self.period,
            basis=QUBIT_BASIS,
            static=self.is_static,
        )

    @property
    def lowering_operator(self) -> np.ndarray:
        return SIGMA_MINUS

    @property
    def emitter_component(self) -> int:
        return QUBIT_BASIS.index((1, 0))

    @property
    def raising_component(self) -> int:
        return QUBIT_BASIS.index((0, 1))

    def emission_amplitude(self, t):
        """l(t) = -(i/2) sqrt(pi) g(t)"""
        return -0.5j * np.sqrt(np.pi) * self.g(t)


def qubit_generator(model: QubitModel) -> PeriodicGenerator:
    """Reduced 3x3 generator of the modulated qubit"""
    generator = model.generator()
    logger.debug(f"Qubit generator built: f={model.flux}, static={model.is_static}")
    return generator
