"""
Modulation waveforms and protocol periods
"""

import logging
import math
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Union

import numpy as np

from ..utils.constants import (
    STATIC_PERIOD,
    WAVEFORM_CONSTANT,
    WAVEFORM_COSINE,
    WAVEFORM_KINDS,
    WAVEFORM_OFFSET_COSINE,
)

logger = logging.getLogger(__name__)

Number = Union[int, float, complex]


@dataclass(frozen=True)
class Waveform:
    """
    Periodic parameter modulation

    constant:       amplitude
    cosine:         offset + amplitude * cos(Omega t + phase)
    offset_cosine:  offset + amplitude * (1 + cos(Omega t + phase))
    """
    kind: str = WAVEFORM_CONSTANT
    amplitude: complex = 0.0
    frequency: float = 0.0
    phase: float = 0.0
    offset: complex = 0.0

    def __post_init__(self):
        if self.kind not in WAVEFORM_KINDS:
            raise ValueError(f"Unknown waveform kind: {self.kind}")
        if self.kind != WAVEFORM_CONSTANT and not self.frequency > 0:
            raise ValueError(f"{self.kind} waveform needs a positive frequency, got {self.frequency}")

    @classmethod
    def constant(cls, value: Number) -> "Waveform":
        return cls(kind=WAVEFORM_CONSTANT, amplitude=value)

    @classmethod
    def cosine(cls, amplitude: Number, frequency: float, phase: float = 0.0,
               offset: Number = 0.0) -> "Waveform":
        return cls(WAVEFORM_COSINE, amplitude, frequency, phase, offset)

    @classmethod
    def offset_cosine(cls, amplitude: Number, frequency: float, phase: float = 0.0,
                      offset: Number = 0.0) -> "Waveform":
        return cls(WAVEFORM_OFFSET_COSINE, amplitude, frequency, phase, offset)

    @property
    def is_static(self) -> bool:
        return self.kind == WAVEFORM_CONSTANT

    @property
    def period(self) -> float:
        return math.inf if self.is_static else 2.0 * math.pi / self.frequency

    def __call__(self, t):
        if self.kind == WAVEFORM_CONSTANT:
            if np.ndim(t):
                return np.full(np.shape(t), self.amplitude, dtype=complex)
            return complex(self.amplitude)
        wave = np.cos(self.frequency * np.asarray(t, dtype=float) + self.phase)
        if self.kind == WAVEFORM_OFFSET_COSINE:
            wave = 1.0 + wave
        value = self.offset + self.amplitude * wave
        return value if np.ndim(t) else complex(value)

    def mean(self) -> complex:
        """Average over one period"""
        if self.kind == WAVEFORM_CONSTANT:
            return complex(self.amplitude)
        if self.kind == WAVEFORM_COSINE:
            return complex(self.offset)
        return complex(self.offset + self.amplitude)

    def frozen(self, t: float) -> "Waveform":
        return Waveform.constant(self(t))

    def scaled(self, factor: Number) -> "Waveform":
        return replace(self, amplitude=self.amplitude * factor, offset=self.offset * factor)

    def to_value(self) -> Any:
        """Plain representation used in config files"""
        if self.is_static:
            return plain_number(self.amplitude)
        value = {
            'kind': self.kind,
            'amplitude': plain_number(self.amplitude),
            'frequency': float(self.frequency),
        }
        if self.phase:
            value['phase'] = float(self.phase)
        if self.offset:
            value['offset'] = plain_number(self.offset)
        return value


def plain_number(value: Number) -> Any:
    value = complex(value)
    if value.imag == 0.0:
        return float(value.real)
    return [float(value.real), float(value.imag)]


def parse_number(value: Any) -> Number:
    """Accept a real number or a [re, im] pair"""
    if isinstance(value, bool):
        raise ValueError(f"Expected a number, got {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    if isinstance(value, (list, tuple)) and len(value) == 2 \
            and all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in value):
        return complex(float(value[0]), float(value[1]))
    raise ValueError(f"Expected a number or [re, im] pair, got {value!r}")


WAVEFORM_KEYS = ('kind', 'amplitude', 'frequency', 'phase', 'offset')


def waveform_from_value(value: Any) -> Waveform:
    """
    Build a Waveform from a config value

    Args:
        value: Number (constant) or mapping with kind/amplitude/frequency/phase/offset

    Raises:
        ValueError: malformed value or unknown keys
    """
    if isinstance(value, Mapping):
        unknown = set(value) - set(WAVEFORM_KEYS)
        if unknown:
            raise ValueError(f"unknown waveform keys: {', '.join(sorted(unknown))}")
        kind = value.get('kind', WAVEFORM_CONSTANT)
        if 'amplitude' not in value:
            raise ValueError("waveform is missing 'amplitude'")
        return Waveform(
            kind=kind,
            amplitude=parse_number(value['amplitude']),
            frequency=float(value.get('frequency', 0.0)),
            phase=float(value.get('phase', 0.0)),
            offset=parse_number(value.get('offset', 0.0)),
        )
    return Waveform.constant(parse_number(value))


def protocol_frequency(waveforms: Iterable[Waveform]) -> float:
    """
    Base modulation frequency of a protocol (0 when fully static)

    Raises:
        ValueError: frequencies that are not integer multiples of the smallest one
    """
    frequencies = sorted(w.frequency for w in waveforms if not w.is_static)
    if not frequencies:
        return 0.0
    base = frequencies[0]
    for frequency in frequencies[1:]:
        ratio = frequency / base
        if abs(ratio - round(ratio)) > 1e-9:
            raise ValueError(
                f"unit-inconsistent frequencies: {frequency} is not a multiple of {base}"
            )
    return base


def protocol_period(waveforms: Iterable[Waveform]) -> float:
    """Common period of a protocol; a nominal period for static ones"""
    base = protocol_frequency(waveforms)
    return STATIC_PERIOD if base == 0.0 else 2.0 * math.pi / base
