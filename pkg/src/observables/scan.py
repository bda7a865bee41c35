"""
Static parameter scans: steady state and dissipation gap per parameter value
"""

import logging
from dataclasses import dataclass, field, replace
from typing import Dict, Sequence

import numpy as np

from .amplitudes import reflection_transmission
from .kerr import kerr_observables
from ..core.floquet import static_quasi_stationary
from ..core.liouvillian import dissipation_gap
from ..models.base import BaseModel
from ..models.kerr import KerrModel, ensure_truncation
from ..models.waveforms import Waveform
from ..utils.constants import MODEL_KERR, MODEL_LAMBDA, MODEL_QUBIT

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ScanResult:
    parameter: str
    values: np.ndarray
    gamma_min: np.ndarray
    columns: Dict[str, np.ndarray] = field(default_factory=dict)


def _static_variant(model: BaseModel, parameter: str, value: float) -> BaseModel:
    """Model with parameter set to value and every other waveform at its period mean"""
    waveforms = model.waveforms
    updates = {name: Waveform.constant(w.mean()) for name, w in waveforms.items()}
    if parameter in waveforms:
        updates[parameter] = Waveform.constant(value)
    elif hasattr(model, parameter):
        updates[parameter] = value
    else:
        raise ValueError(f"{model.kind} model has no parameter {parameter!r}")
    return replace(model, **updates)


def static_scan(model: BaseModel, parameter: str, values: Sequence[float]) -> ScanResult:
    """
    Steady states over a list of static parameter values

    Columns per model: qubit |R|^2, lambda |T|^2, kerr occupation and entropy.
    Kerr truncation is escalated point by point and never lowered.

    Args:
        model: Template model; its other modulated parameters are replaced by their means
        parameter: Model field to scan
        values: Parameter values

    Returns:
        ScanResult with gamma_min and the model's headline columns
    """
    values = np.asarray(values, dtype=float)
    gaps = np.zeros(len(values))
    columns: Dict[str, list] = {}

    current_n_max = getattr(model, 'n_max', None)
    for k, value in enumerate(values):
        point = _static_variant(model, parameter, float(value))
        if isinstance(point, KerrModel):
            point, _ = ensure_truncation(replace(point, n_max=current_n_max))
            current_n_max = point.n_max

        gen = point.generator()
        state = static_quasi_stationary(gen, n_grid=8, m_max=0)
        gaps[k] = dissipation_gap(gen.operator(0.0))

        if point.kind == MODEL_QUBIT:
            columns.setdefault('reflectance', []).append(float(reflection_transmission(point, state).reflectance[0]))
        elif point.kind == MODEL_LAMBDA:
            columns.setdefault('transmittance', []).append(float(reflection_transmission(point, state).transmittance[0]))
        elif point.kind == MODEL_KERR:
            observables = kerr_observables(state, point)
            columns.setdefault('occupation', []).append(float(observables.occupation[0]))
            columns.setdefault('entropy', []).append(float(observables.entropy[0]))

    logger.info(f"Static scan over {parameter}: {len(values)} points")
    return ScanResult(
        parameter=parameter,
        values=values,
        gamma_min=gaps,
        columns={name: np.asarray(column) for name, column in columns.items()},
    )
