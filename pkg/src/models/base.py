"""
Base model interface
"""

import math
from abc import ABC, abstractmethod
from dataclasses import fields, replace
from typing import Dict

import numpy as np

from .waveforms import Waveform, protocol_frequency, protocol_period
from ..core.liouvillian import LindbladSpec, PeriodicGenerator, build_generator


class BaseModel(ABC):
    """
    Base class for driven-dissipative models

    Concrete models are frozen dataclasses; every Waveform-typed field is a
    modulated parameter.
    """

    kind: str = ""

    @property
    def waveforms(self) -> Dict[str, Waveform]:
        return {
            f.name: getattr(self, f.name)
            for f in fields(self)
            if isinstance(getattr(self, f.name), Waveform)
        }

    @property
    def omega(self) -> float:
        """Base modulation frequency (0 for static protocols)"""
        return protocol_frequency(self.waveforms.values())

    @property
    def period(self) -> float:
        return protocol_period(self.waveforms.values())

    @property
    def is_static(self) -> bool:
        return all(w.is_static for w in self.waveforms.values())

    @abstractmethod
    def lindblad_spec(self) -> LindbladSpec:
        """
        Lindblad data for this model

        Returns:
            LindbladSpec with the model's basis conventions
        """
        pass

    def generator(self) -> PeriodicGenerator:
        return build_generator(self.lindblad_spec(), label=self.kind)

    @property
    @abstractmethod
    def lowering_operator(self) -> np.ndarray:
        """Operator whose expectation drives the outgoing field"""
        pass

    @property
    def emitter_component(self) -> int:
        """Index of <lowering operator> in the reduced vector"""
        raise NotImplementedError(f"{self.kind} model has no emitter component")

    @property
    def raising_component(self) -> int:
        """Index of <lowering operator^+> in the reduced vector"""
        raise NotImplementedError(f"{self.kind} model has no raising component")

    def emission_amplitude(self, t):
        """
        Coefficient l(t) of the lowering operator in the outgoing field
        """
        raise NotImplementedError(f"{self.kind} model has no input-output relation")

    def frozen(self, t: float) -> "BaseModel":
        """Same model with every waveform frozen at time t"""
        return replace(self, **{name: w.frozen(t) for name, w in self.waveforms.items()})

    def describe(self) -> str:
        period = self.period if not self.is_static else math.inf
        return f"{self.kind} model (period={period:.6g})"
