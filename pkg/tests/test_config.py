"""
Tests for experiment and runtime configuration
"""

from pathlib import Path

import pytest
import yaml

from src.models.waveforms import Waveform
import src.utils.config as runtime_config
from src.utils.config import Config, get_config, reload_config
from src.utils.experiment_config import (
    ConfigValidationError,
    config_to_dict,
    load_config,
    parse_config,
    parse_mapping,
    scan_values,
    with_override,
)
from src.utils.validators import parse_value_list, prepare_output_dir, validate_workers

EXPERIMENTS = Path(__file__).resolve().parent.parent / "config" / "experiments"

MINIMAL = """
name: minimal
model: {kind: qubit, flux: 1.0}
outputs: [state]
"""


def minimal(**overrides) -> dict:
    data = yaml.safe_load(MINIMAL)
    data.update(overrides)
    return data


def errors_of(data) -> list:
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_mapping(data)
    return excinfo.value.errors


@pytest.mark.parametrize("path", sorted(EXPERIMENTS.glob("*.yaml")), ids=lambda p: p.stem)
def test_bundled_experiments_load(path) -> None:
    cfg = load_config(path)
    assert cfg.name == path.stem
    assert cfg.outputs
    assert parse_mapping(config_to_dict(cfg)) == cfg


def test_defaults() -> None:
    cfg = parse_config(MINIMAL)
    assert cfg.units == 'gamma'
    assert cfg.protocol == {}
    assert cfg.solver.grid == 512
    assert cfg.solver.n_max is None
    assert cfg.sweep is None
    assert cfg.output_names == ('state',)


def test_protocol_waveforms() -> None:
    cfg = parse_mapping(minimal(protocol={'coupling': {'kind': 'offset_cosine', 'amplitude': 0.5, 'frequency': 2.0}}))
    assert cfg.protocol['coupling'] == Waveform.offset_cosine(0.5, 2.0)


def test_collects_every_error() -> None:
    errors = errors_of({
        'model': {'kind': 'qubit', 'flux': -1.0, 'color': 'red'},
        'solver': {'grid': 4},
        'outputs': ['occupation'],
        'extra': 1,
    })
    assert "unknown key 'extra' in configuration" in errors
    assert "unknown key 'color' in model" in errors
    assert "model.flux: must be nonnegative, got -1.0" in errors
    assert "solver.grid: must be >= 8, got 4" in errors
    assert "outputs.occupation: observable unsupported for model 'qubit'" in errors


@pytest.mark.parametrize("data, expected", [
    ({'model': {'kind': 'qubit'}, 'outputs': ['state']}, "model.flux: required field missing"),
    ({'model': {'kind': 'spin'}, 'outputs': ['state']}, "model.kind: unknown model"),
    (minimal(units='hertz'), "units: only 'gamma' is supported"),
    (minimal(outputs=[]), "outputs: must list at least one observable"),
    (minimal(outputs=['state', 'state']), "outputs: 'state' requested more than once"),
    (minimal(outputs=[{'name': 'g1', 'channel': 'up'}]), "outputs.g1.channel"),
    (minimal(outputs=[{'name': 'adiabatic', 'order': 2}]), "adiabatic order must be 0 or 1"),
    (minimal(outputs=[{'name': 'spectrum', 'window': [5, -5]}]), "outputs.spectrum.window"),
    (minimal(outputs=[{'name': 'static_scan', 'parameter': 'flux'}]), "'parameter' and 'values' are required"),
    (minimal(protocol={'flux': 1.0}), "unknown key 'flux' in protocol"),
    (minimal(protocol={'coupling': {'kind': 'cosine', 'amplitude': 1.0, 'frequency': 1.0},
                       'detuning': {'kind': 'cosine', 'amplitude': 1.0, 'frequency': 1.5}}), "unit-inconsistent"),
    (minimal(solver={'m_max': 300}), "cannot resolve m_max=300"),
    (minimal(solver={'rtol': 0}), "solver.rtol: must be a positive number"),
    (minimal(sweep={'parameter': 'model.color', 'values': [1]}), "sweep.parameter"),
    (minimal(sweep={'parameter': 'model.flux', 'values': []}), "sweep.values"),
])
def test_validation_errors(data, expected) -> None:
    assert any(expected in error for error in errors_of(data))


def test_amplitudes_need_flux() -> None:
    data = minimal(outputs=['reflection'])
    data['model']['flux'] = 0.0
    assert "outputs.reflection: amplitudes need a positive model.flux" in errors_of(data)


def test_static_parameter_conflicts_with_protocol() -> None:
    data = minimal(protocol={'coupling': {'kind': 'cosine', 'amplitude': 1.0, 'frequency': 1.0}})
    data['model']['coupling'] = 1.0
    assert "protocol.coupling: also set statically in model" in errors_of(data)


def test_malformed_yaml() -> None:
    with pytest.raises(ConfigValidationError) as excinfo:
        parse_config("model: [unclosed")
    assert excinfo.value.errors[0].startswith("malformed YAML")


def test_with_override_paths() -> None:
    cfg = parse_config(MINIMAL + "protocol:\n  coupling: {kind: cosine, amplitude: 1.0, frequency: 0.1}\n")
    assert with_override(cfg, 'model.flux', 10.0).model.parameters['flux'] == 10.0
    assert with_override(cfg, 'protocol.coupling.frequency', 0.5).protocol['coupling'].frequency == 0.5
    assert with_override(cfg, 'solver.m_max', 4).solver.m_max == 4
    # a static value replaces the modulation
    static = with_override(cfg, 'model.coupling', 0.5)
    assert 'coupling' not in static.protocol
    assert static.model.parameters['coupling'] == 0.5


def test_with_override_rejects_bad_paths() -> None:
    cfg = parse_config(MINIMAL)
    with pytest.raises(ConfigValidationError):
        with_override(cfg, 'model.color', 1.0)
    with pytest.raises(ConfigValidationError):
        with_override(cfg, 'protocol.coupling.frequency', 1.0)
    with pytest.raises(ConfigValidationError):
        with_override(cfg, 'model.flux', -1.0)


def test_scan_values() -> None:
    assert scan_values([1, 2.5]) == [1.0, 2.5]
    assert scan_values({'start': -30, 'stop': 0, 'points': 4}) == [-30.0, -20.0, -10.0, 0.0]
    with pytest.raises(ValueError):
        scan_values({'start': 0, 'stop': 1})
    with pytest.raises(ValueError):
        scan_values([])


class TestRuntimeConfig:

    def test_defaults_without_file(self, tmp_path) -> None:
        config = Config(tmp_path / "missing.yaml")
        assert config.log_level == 'INFO'
        assert config.workers == 1
        assert config.output_dir == 'results'
        assert config.dense_limit == 64

    def test_file_values_merge_with_defaults(self, tmp_path) -> None:
        path = tmp_path / "config.yaml"
        path.write_text("runtime:\n  workers: 4\nlogging:\n  level: debug\n", encoding='utf-8')
        config = Config(path)
        assert config.workers == 4
        assert config.log_level == 'DEBUG'
        assert config.output_dir == 'results'

    def test_environment_overrides_file(self, tmp_path, monkeypatch) -> None:
        path = tmp_path / "config.yaml"
        path.write_text("runtime:\n  workers: 4\n", encoding='utf-8')
        monkeypatch.setenv('FLOQUET_WORKERS', '2')
        monkeypatch.setenv('FLOQUET_OUTPUT_DIR', str(tmp_path / "out"))
        config = Config(path)
        assert config.workers == 2
        assert config.output_dir == str(tmp_path / "out")

    def test_reload_picks_up_file_changes(self, tmp_path, monkeypatch) -> None:
        path = tmp_path / "config.yaml"
        path.write_text("runtime:\n  workers: 2\n", encoding='utf-8')
        monkeypatch.delenv('FLOQUET_WORKERS', raising=False)
        monkeypatch.setattr(runtime_config, '_config', Config(path))
        assert get_config().workers == 2
        path.write_text("runtime:\n  workers: 3\n", encoding='utf-8')
        assert reload_config().workers == 3
        assert get_config() is reload_config()

    @pytest.mark.parametrize("text", ["logging:\n  level: LOUD\n", "runtime:\n  workers: 0\n", "- a list\n"])
    def test_invalid_file(self, tmp_path, text) -> None:
        path = tmp_path / "config.yaml"
        path.write_text(text, encoding='utf-8')
        with pytest.raises(ValueError):
            Config(path)


class TestValidators:

    def test_parse_value_list(self) -> None:
        assert parse_value_list("0.01, 1,10 ,100") == [0.01, 1.0, 10.0, 100.0]
        with pytest.raises(ValueError):
            parse_value_list(" , ")
        with pytest.raises(ValueError):
            parse_value_list("1,two")

    def test_validate_workers(self) -> None:
        assert validate_workers(1) == 1
        with pytest.raises(ValueError):
            validate_workers(0)

    def test_prepare_output_dir(self, tmp_path) -> None:
        target = prepare_output_dir(tmp_path / "a" / "b")
        assert target.is_dir()
        blocker = tmp_path / "file.txt"
        blocker.write_text("x", encoding='utf-8')
        with pytest.raises(ValueError):
            prepare_output_dir(blocker)
