"""
Experiment configuration: YAML documents in, validated dataclasses out

Every rate and frequency is a multiple of gamma. parse_config collects all
validation errors before raising.
"""

import copy
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Tuple

import yaml

from ..models.registry import MODEL_CLASSES, model_parameters, required_parameters
from ..models.waveforms import (
    WAVEFORM_KEYS,
    Waveform,
    plain_number,
    parse_number,
    protocol_frequency,
    waveform_from_value,
)
from .constants import (
    DEFAULT_ATOL,
    DEFAULT_GRID,
    DEFAULT_M_MAX,
    DEFAULT_RTOL,
    MAX_GRID,
    SUPPORTED_OUTPUTS,
)

logger = logging.getLogger(__name__)

TOP_LEVEL_KEYS = ('name', 'units', 'model', 'protocol', 'solver', 'outputs', 'sweep')
UNITS = 'gamma'

SOLVER_DEFAULTS: Dict[str, Any] = {
    'grid': DEFAULT_GRID,
    'm_max': DEFAULT_M_MAX,
    'rtol': DEFAULT_RTOL,
    'atol': DEFAULT_ATOL,
    'oracle': False,
    'grid_convergence': True,
    'max_grid': MAX_GRID,
    'n_max': None,
}

# Options accepted by each output
OUTPUT_OPTIONS: Dict[str, Tuple[str, ...]] = {
    'state': (),
    'floquet': (),
    'gamma_min': (),
    'adiabatic': ('order',),
    'high_frequency': ('order',),
    'static_scan': ('parameter', 'values'),
    'reflection': (),
    'fluxes': (),
    'elastic_spectrum': ('channel',),
    'spectrum': ('channel', 'window', 'points', 'm_max'),
    'g1': ('channel', 'tau_max', 'n_tau', 'n_tau_c', 'method'),
    'g2': ('channel', 'tau_max', 'n_tau', 'n_tau_c'),
    'weak_power': ('grid',),
    'occupation': (),
    'entropy': (),
    'hysteresis': (),
}


AMPLITUDE_OUTPUTS = ('reflection', 'elastic_spectrum', 'spectrum')


class ConfigValidationError(ValueError):
    """Invalid experiment configuration; carries every error found"""

    def __init__(self, errors: List[str]):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True)
class ModelBlock:
    """Model kind and its static parameters"""
    kind: str
    parameters: Dict[str, Any] = field(default_factory=dict)


@dataclass(frozen=True)
class SolverSettings:
    grid: int = DEFAULT_GRID
    m_max: int = DEFAULT_M_MAX
    rtol: float = DEFAULT_RTOL
    atol: float = DEFAULT_ATOL
    oracle: bool = False
    grid_convergence: bool = True
    max_grid: int = MAX_GRID
    n_max: Optional[int] = None


@dataclass(frozen=True)
class OutputRequest:
    name: str
    options: Dict[str, Any] = field(default_factory=dict)

    def option(self, key: str, default: Any = None) -> Any:
        return self.options.get(key, default)


@dataclass(frozen=True)
class SweepAxis:
    """Dotted config path and the values it takes"""
    parameter: str
    values: Tuple[float, ...]


@dataclass(frozen=True)
class ExperimentConfig:
    model: ModelBlock
    protocol: Dict[str, Waveform]
    solver: SolverSettings
    outputs: Tuple[OutputRequest, ...]
    sweep: Optional[SweepAxis] = None
    name: str = 'experiment'
    units: str = UNITS

    @property
    def output_names(self) -> Tuple[str, ...]:
        return tuple(request.name for request in self.outputs)


def _is_number(value: Any) -> bool:
    return isinstance(value, (int, float)) and not isinstance(value, bool)


def _unknown(keys, allowed, where: str) -> List[str]:
    return [f"unknown key '{key}' in {where}" for key in sorted(set(keys) - set(allowed), key=str)]


def _parse_model(data: Any, errors: List[str]) -> Optional[ModelBlock]:
    if not isinstance(data, Mapping):
        errors.append("model: must be a mapping")
        return None
    kind = data.get('kind')
    if kind is None:
        errors.append("model.kind: required field missing")
        return None
    if kind not in MODEL_CLASSES:
        errors.append(f"model.kind: unknown model '{kind}' (expected one of {', '.join(MODEL_CLASSES)})")
        return None

    vocabulary = model_parameters(kind)
    errors.extend(_unknown([k for k in data if k != 'kind'], vocabulary, "model"))
    if 'flux' not in data:
        errors.append("model.flux: required field missing")

    parameters: Dict[str, Any] = {}
    for name, value in data.items():
        if name == 'kind' or name not in vocabulary:
            continue
        try:
            number = parse_number(value)
        except ValueError as e:
            errors.append(f"model.{name}: {e}")
            continue
        if isinstance(number, complex) and not vocabulary[name]:
            errors.append(f"model.{name}: must be real")
            continue
        parameters[name] = number

    flux = parameters.get('flux')
    if flux is not None and flux < 0:
        errors.append(f"model.flux: must be nonnegative, got {flux}")
    gamma = parameters.get('gamma')
    if gamma is not None and gamma <= 0:
        errors.append(f"model.gamma: must be positive, got {gamma}")
    return ModelBlock(kind=kind, parameters=parameters)


def _parse_protocol(data: Any, model: Optional[ModelBlock], errors: List[str]) -> Dict[str, Waveform]:
    if data is None:
        return {}
    if not isinstance(data, Mapping):
        errors.append("protocol: must be a mapping")
        return {}

    modulated = None
    if model is not None:
        vocabulary = model_parameters(model.kind)
        modulated = [name for name, is_waveform in vocabulary.items() if is_waveform]

    protocol: Dict[str, Waveform] = {}
    for name, value in data.items():
        if modulated is not None and name not in modulated:
            errors.append(f"unknown key '{name}' in protocol (modulated parameters: {', '.join(modulated)})")
            continue
        if model is not None and name in model.parameters:
            errors.append(f"protocol.{name}: also set statically in model")
            continue
        try:
            protocol[name] = waveform_from_value(value)
        except (ValueError, TypeError) as e:
            errors.append(f"protocol.{name}: {e}")

    try:
        protocol_frequency(protocol.values())
    except ValueError as e:
        errors.append(f"protocol: {e}")
    return protocol


def _parse_solver(data: Any, errors: List[str]) -> SolverSettings:
    if data is None:
        return SolverSettings()
    if not isinstance(data, Mapping):
        errors.append("solver: must be a mapping")
        return SolverSettings()
    errors.extend(_unknown(data, SOLVER_DEFAULTS, "solver"))
    values = {key: data.get(key, default) for key, default in SOLVER_DEFAULTS.items()}
    start = len(errors)

    for key in ('grid', 'm_max', 'max_grid'):
        if not isinstance(values[key], int) or isinstance(values[key], bool):
            errors.append(f"solver.{key}: must be an integer")
    for key in ('rtol', 'atol'):
        if not _is_number(values[key]) or values[key] <= 0:
            errors.append(f"solver.{key}: must be a positive number")
    for key in ('oracle', 'grid_convergence'):
        if not isinstance(values[key], bool):
            errors.append(f"solver.{key}: must be true or false")
    if values['n_max'] is not None and (not isinstance(values['n_max'], int) or values['n_max'] < 2):
        errors.append("solver.n_max: must be an integer >= 2")
    if len(errors) > start:
        return SolverSettings()

    if values['grid'] < 8:
        errors.append(f"solver.grid: must be >= 8, got {values['grid']}")
    if values['m_max'] < 0:
        errors.append(f"solver.m_max: must be >= 0, got {values['m_max']}")
    elif values['grid'] < 2 * values['m_max'] + 2:
        errors.append(f"solver.grid: {values['grid']} samples cannot resolve m_max={values['m_max']}")
    if values['max_grid'] < values['grid']:
        errors.append("solver.max_grid: must not be smaller than solver.grid")
    return SolverSettings(
        grid=values['grid'],
        m_max=values['m_max'],
        rtol=float(values['rtol']),
        atol=float(values['atol']),
        oracle=values['oracle'],
        grid_convergence=values['grid_convergence'],
        max_grid=values['max_grid'],
        n_max=values['n_max'],
    )


def _normalize_option(value: Any) -> Any:
    if isinstance(value, list):
        return tuple(value)
    return value


def _check_output_options(request: OutputRequest, model: Optional[ModelBlock], errors: List[str]) -> None:
    where = f"outputs.{request.name}"
    options = request.options
    channel = options.get('channel')
    if channel is not None and channel not in ('L', 'R'):
        errors.append(f"{where}.channel: must be 'L' or 'R'")
    for key in ('points', 'n_tau', 'n_tau_c', 'grid', 'm_max'):
        value = options.get(key)
        if value is not None and (not isinstance(value, int) or isinstance(value, bool) or value < 1):
            errors.append(f"{where}.{key}: must be a positive integer")
    order = options.get('order')
    if order is not None and (not isinstance(order, int) or isinstance(order, bool) or order < 0):
        errors.append(f"{where}.order: must be a nonnegative integer")
    if request.name == 'adiabatic' and order is not None and order > 1:
        errors.append(f"{where}.order: adiabatic order must be 0 or 1")
    if request.name == 'high_frequency' and order is not None and order < 1:
        errors.append(f"{where}.order: high-frequency order must be >= 1")
    tau_max = options.get('tau_max')
    if tau_max is not None and (not _is_number(tau_max) or tau_max < 0):
        errors.append(f"{where}.tau_max: must be a nonnegative number")
    method = options.get('method')
    if method is not None and method not in ('integrate', 'floquet'):
        errors.append(f"{where}.method: must be 'integrate' or 'floquet'")
    window = options.get('window')
    if window is not None and (len(window) != 2 or not all(_is_number(v) for v in window) or window[0] >= window[1]):
        errors.append(f"{where}.window: must be [low, high] with low < high")

    if request.name == 'static_scan':
        parameter = options.get('parameter')
        values = options.get('values')
        if parameter is None or values is None:
            errors.append(f"{where}: 'parameter' and 'values' are required")
        elif model is not None and parameter not in model_parameters(model.kind):
            errors.append(f"{where}.parameter: {model.kind} model has no parameter '{parameter}'")
        if values is not None:
            try:
                scan_values(values)
            except ValueError as e:
                errors.append(f"{where}.values: {e}")


def scan_values(values: Any) -> List[float]:
    """
    Static-scan values from a list or a {start, stop, points} mapping

    Raises:
        ValueError: malformed values
    """
    if isinstance(values, Mapping):
        if set(values) != {'start', 'stop', 'points'}:
            raise ValueError("range form needs exactly start, stop and points")
        start, stop, points = values['start'], values['stop'], values['points']
        if not (_is_number(start) and _is_number(stop)) or not isinstance(points, int) or points < 1:
            raise ValueError("range form needs numeric start/stop and a positive integer points")
        if points == 1:
            return [float(start)]
        step = (stop - start) / (points - 1)
        return [float(start + k * step) for k in range(points)]
    if not isinstance(values, (list, tuple)) or not values or not all(_is_number(v) for v in values):
        raise ValueError("must be a non-empty list of numbers or a {start, stop, points} range")
    return [float(v) for v in values]


def _parse_outputs(data: Any, model: Optional[ModelBlock], errors: List[str]) -> Tuple[OutputRequest, ...]:
    if not isinstance(data, list) or not data:
        errors.append("outputs: must list at least one observable")
        return ()

    requests = []
    for item in data:
        if isinstance(item, str):
            request = OutputRequest(name=item)
        elif isinstance(item, Mapping) and 'name' in item:
            request = OutputRequest(
                name=item['name'],
                options={k: _normalize_option(v) for k, v in item.items() if k != 'name'},
            )
        else:
            errors.append(f"outputs: malformed entry {item!r}")
            continue

        if request.name not in OUTPUT_OPTIONS:
            errors.append(f"outputs: unknown observable '{request.name}'")
            continue
        if model is not None and request.name not in SUPPORTED_OUTPUTS[model.kind]:
            errors.append(f"outputs.{request.name}: observable unsupported for model '{model.kind}'")
            continue
        errors.extend(_unknown(request.options, OUTPUT_OPTIONS[request.name], f"outputs.{request.name}"))
        _check_output_options(request, model, errors)
        requests.append(request)

    names = [request.name for request in requests]
    duplicates = sorted({name for name in names if names.count(name) > 1})
    for name in duplicates:
        errors.append(f"outputs: '{name}' requested more than once")
    return tuple(requests)


def sweep_path_error(path: str, model_kind: Optional[str]) -> Optional[str]:
    """Reason a dotted sweep path is invalid, or None"""
    parts = path.split('.')
    if parts[0] == 'model' and len(parts) == 2:
        if model_kind is not None and parts[1] not in model_parameters(model_kind):
            return f"model has no parameter '{parts[1]}'"
        return None
    if parts[0] == 'protocol' and len(parts) == 3:
        if model_kind is not None and not model_parameters(model_kind).get(parts[1]):
            return f"'{parts[1]}' is not a modulated parameter"
        if parts[2] not in WAVEFORM_KEYS or parts[2] == 'kind':
            return f"'{parts[2]}' is not a numeric waveform field"
        return None
    if parts[0] == 'solver' and len(parts) == 2 and parts[1] in SOLVER_DEFAULTS:
        return None
    return "expected model.<param>, protocol.<param>.<field> or solver.<setting>"


def _parse_sweep(data: Any, model: Optional[ModelBlock], errors: List[str]) -> Optional[SweepAxis]:
    if data is None:
        return None
    if not isinstance(data, Mapping):
        errors.append("sweep: must be a mapping")
        return None
    errors.extend(_unknown(data, ('parameter', 'values'), "sweep"))
    parameter = data.get('parameter')
    values = data.get('values')
    if not isinstance(parameter, str):
        errors.append("sweep.parameter: required dotted path")
        return None
    problem = sweep_path_error(parameter, model.kind if model else None)
    if problem:
        errors.append(f"sweep.parameter: {problem}")
    if not isinstance(values, list) or not values or not all(_is_number(v) for v in values):
        errors.append("sweep.values: must be a non-empty list of numbers")
        return None
    return SweepAxis(parameter=parameter, values=tuple(values))


def parse_mapping(data: Any) -> ExperimentConfig:
    """
    Validate an already-loaded configuration mapping

    Raises:
        ConfigValidationError: every problem found
    """
    errors: List[str] = []
    if not isinstance(data, Mapping):
        raise ConfigValidationError(["configuration must be a mapping"])

    errors.extend(_unknown(data, TOP_LEVEL_KEYS, "configuration"))
    units = data.get('units', UNITS)
    if units != UNITS:
        errors.append(f"units: only '{UNITS}' is supported, got {units!r}")
    name = data.get('name', 'experiment')
    if not isinstance(name, str) or not name:
        errors.append("name: must be a non-empty string")

    model = _parse_model(data.get('model'), errors)
    protocol = _parse_protocol(data.get('protocol'), model, errors)
    solver = _parse_solver(data.get('solver'), errors)
    outputs = _parse_outputs(data.get('outputs'), model, errors)
    sweep = _parse_sweep(data.get('sweep'), model, errors)

    if model is not None:
        provided = set(model.parameters) | set(protocol)
        missing = required_parameters(model.kind) - provided - {'flux'}
        for parameter in sorted(missing):
            errors.append(f"model.{parameter}: required field missing")
        if model.parameters.get('flux') == 0:
            for request in outputs:
                if request.name in AMPLITUDE_OUTPUTS:
                    errors.append(f"outputs.{request.name}: amplitudes need a positive model.flux")

    if errors:
        raise ConfigValidationError(errors)

    return ExperimentConfig(
        model=model,
        protocol=protocol,
        solver=solver,
        outputs=outputs,
        sweep=sweep,
        name=name,
        units=units,
    )


def parse_config(text: str) -> ExperimentConfig:
    """
    Parse and validate a YAML experiment document

    Args:
        text: YAML document

    Returns:
        ExperimentConfig

    Raises:
        ConfigValidationError: malformed YAML or any validation error
    """
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        raise ConfigValidationError([f"malformed YAML: {e}"]) from e
    return parse_mapping(data)


def load_config(path) -> ExperimentConfig:
    """Read and parse an experiment file"""
    path = Path(path)
    config = parse_config(path.read_text(encoding='utf-8'))
    logger.info(f"Experiment '{config.name}' loaded from {path}")
    return config


def _plain(value: Any) -> Any:
    if isinstance(value, tuple):
        return [_plain(v) for v in value]
    if isinstance(value, complex):
        return plain_number(value)
    return value


def config_to_dict(cfg: ExperimentConfig) -> Dict[str, Any]:
    """
    Plain mapping that re-parses to an equal ExperimentConfig
    """
    model = {'kind': cfg.model.kind}
    model.update({name: _plain(value) for name, value in cfg.model.parameters.items()})
    solver = {key: getattr(cfg.solver, key) for key in SOLVER_DEFAULTS}
    if solver['n_max'] is None:
        del solver['n_max']
    outputs = []
    for request in cfg.outputs:
        if request.options:
            entry = {'name': request.name}
            entry.update({key: _plain(value) for key, value in request.options.items()})
            outputs.append(entry)
        else:
            outputs.append(request.name)

    data: Dict[str, Any] = {
        'name': cfg.name,
        'units': cfg.units,
        'model': model,
        'protocol': {name: waveform.to_value() for name, waveform in cfg.protocol.items()},
        'solver': solver,
        'outputs': outputs,
    }
    if cfg.sweep is not None:
        data['sweep'] = {'parameter': cfg.sweep.parameter, 'values': list(cfg.sweep.values)}
    return data


def with_override(cfg: ExperimentConfig, path: str, value: Any) -> ExperimentConfig:
    """
    Copy of cfg with one dotted path set to value (the sweep block is dropped)

    Raises:
        ConfigValidationError: invalid path or resulting config
    """
    problem = sweep_path_error(path, cfg.model.kind)
    if problem:
        raise ConfigValidationError([f"{path}: {problem}"])
    data = copy.deepcopy(config_to_dict(cfg))
    data.pop('sweep', None)
    parts = path.split('.')
    if parts[0] == 'protocol':
        waveform = data['protocol'].get(parts[1])
        if not isinstance(waveform, dict):
            raise ConfigValidationError([f"{path}: protocol has no modulated '{parts[1]}'"])
        waveform[parts[2]] = value
    else:
        target = data[parts[0]]
        # a static value replaces a modulation of the same parameter
        if parts[0] == 'model':
            data['protocol'].pop(parts[1], None)
        target[parts[1]] = value
    return parse_mapping(data)
