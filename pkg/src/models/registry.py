"""
Model registry
Maps config model kinds to model classes and their parameter vocabulary
"""

import logging
from dataclasses import MISSING, fields
from typing import Any, Dict, Mapping, Type

from .base import BaseModel
from .kerr import KerrModel
from .lambda_system import LambdaModel
from .qubit import QubitModel
from .waveforms import Waveform
from ..utils.constants import MODEL_KERR, MODEL_LAMBDA, MODEL_QUBIT

logger = logging.getLogger(__name__)

MODEL_CLASSES: Dict[str, Type[BaseModel]] = {
    MODEL_QUBIT: QubitModel,
    MODEL_LAMBDA: LambdaModel,
    MODEL_KERR: KerrModel,
}

# Solver-owned fields are configured in the solver block
SOLVER_FIELDS = {'n_max'}


def model_parameters(kind: str) -> Dict[str, bool]:
    """
    Parameter names of a model kind

    Returns:
        Mapping name -> True when the parameter may be modulated (Waveform)
    """
    cls = MODEL_CLASSES[kind]
    parameters = {}
    for f in fields(cls):
        if f.name in SOLVER_FIELDS:
            continue
        parameters[f.name] = f.type is Waveform
    return parameters


def required_parameters(kind: str) -> set:
    return {
        f.name for f in fields(MODEL_CLASSES[kind])
        if f.default is MISSING and f.default_factory is MISSING
    }


def build_model(
    kind: str,
    parameters: Mapping[str, Any],
    protocol: Mapping[str, Waveform],
    n_max: int = None
) -> BaseModel:
    """
    Instantiate a model from validated config blocks

    Args:
        kind: qubit, lambda or kerr
        parameters: Static parameters (numbers)
        protocol: Modulated parameters
        n_max: Fock truncation (kerr only)

    Returns:
        Model instance
    """
    if kind not in MODEL_CLASSES:
        raise ValueError(f"Unknown model kind: {kind}")
    modulated = model_parameters(kind)

    arguments: Dict[str, Any] = {}
    for name, value in parameters.items():
        if modulated.get(name):
            arguments[name] = value if isinstance(value, Waveform) else Waveform.constant(value)
        else:
            arguments[name] = value
    for name, waveform in protocol.items():
        arguments[name] = waveform
    if kind == MODEL_KERR and n_max is not None:
        arguments['n_max'] = int(n_max)

    model = MODEL_CLASSES[kind](**arguments)
    logger.debug(f"Model built: {model.describe()}")
    return model
