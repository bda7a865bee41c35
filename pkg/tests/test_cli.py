"""
End-to-end tests for the command-line entry point
"""

import csv

import pytest

from main import main
from src.storage.manifest import read_manifest

STATIC_QUBIT = """
name: static_qubit
model: {kind: qubit, flux: 1.0}
solver: {grid: 16, m_max: 2}
outputs: [state, reflection, floquet]
"""

DARK_QUBIT = """
name: dark_qubit
model: {kind: qubit, flux: 1.0, coupling: 0.0}
solver: {grid: 16, m_max: 2}
outputs: [state]
"""


def write_config(tmp_path, text: str, name: str = "experiment.yaml"):
    path = tmp_path / name
    path.write_text(text, encoding='utf-8')
    return path


def read_rows(path):
    with open(path, newline='', encoding='utf-8') as f:
        return list(csv.reader(f))


def test_validate_ok(tmp_path, capsys) -> None:
    path = write_config(tmp_path, STATIC_QUBIT)
    assert main(['validate', str(path)]) == 0
    assert "ok (qubit" in capsys.readouterr().out


def test_validate_reports_every_error(tmp_path, capsys) -> None:
    path = write_config(tmp_path, "model: {kind: qubit, flux: -1}\noutputs: [occupation]\n")
    assert main(['validate', str(path)]) == 1
    err = capsys.readouterr().err
    assert "model.flux" in err
    assert "outputs.occupation" in err


def test_solve_rejects_invalid_config(tmp_path) -> None:
    path = write_config(tmp_path, "model: {kind: spin}\n")
    assert main(['solve', str(path), '--out', str(tmp_path / "out")]) == 1
    assert not (tmp_path / "out" / "manifest.yaml").exists()


def test_solve_writes_tables_and_manifest(tmp_path) -> None:
    path = write_config(tmp_path, STATIC_QUBIT)
    out = tmp_path / "out"
    assert main(['solve', str(path), '--out', str(out), '--workers', '1']) == 0

    manifest = read_manifest(out / "manifest.yaml")
    assert manifest['status'] == 'ok'
    assert manifest['config']['name'] == 'static_qubit'
    assert {'state.csv', 'reflection.csv', 'floquet.csv'} <= {entry['file'] for entry in manifest['files']}
    for entry in manifest['files']:
        rows = read_rows(out / entry['file'])
        assert rows[0] == entry['columns']
        assert len(rows) - 1 == entry['rows']

    state = read_rows(out / "state.csv")
    assert state[0][0] == 'tau_c/T'
    assert len(state) - 1 == 17


def test_solver_failure_exits_with_two(tmp_path) -> None:
    # no coupling and no detuning: A vanishes and has no steady state
    path = write_config(tmp_path, DARK_QUBIT)
    out = tmp_path / "out"
    assert main(['solve', str(path), '--out', str(out)]) == 2
    assert not (out / "manifest.yaml").exists()
    assert not (out / "state.csv").exists()


def test_sweep_combined_table(tmp_path) -> None:
    path = write_config(tmp_path, STATIC_QUBIT)
    out = tmp_path / "sweep"
    code = main(['sweep', str(path), '--param', 'model.flux', '--values', '1,2', '--out', str(out), '--workers', '1'])
    assert code == 0

    rows = read_rows(out / "sweep.csv")
    header = rows[0]
    assert header[:2] == ['model.flux', 'ok']
    assert [float(row[0]) for row in rows[1:]] == [1.0, 2.0]
    assert all(float(row[1]) == 1.0 for row in rows[1:])
    assert (out / "sweep_manifest.yaml").exists()
    point_dirs = sorted(p.name for p in out.iterdir() if p.is_dir())
    assert point_dirs == ['000_model_flux=1', '001_model_flux=2']


def test_sweep_marks_failed_points(tmp_path) -> None:
    path = write_config(tmp_path, DARK_QUBIT)
    out = tmp_path / "sweep"
    code = main(['sweep', str(path), '--param', 'model.flux', '--values', '1', '--out', str(out), '--workers', '1'])
    assert code == 2
    rows = read_rows(out / "sweep.csv")
    assert float(rows[1][1]) == 0.0


def test_sweep_needs_values(tmp_path) -> None:
    path = write_config(tmp_path, STATIC_QUBIT)
    assert main(['sweep', str(path), '--out', str(tmp_path / "sweep")]) == 1


@pytest.mark.slow
def test_solve_bundled_fast_experiment(tmp_path) -> None:
    from pathlib import Path

    config = Path(__file__).resolve().parent.parent / "config" / "experiments" / "fig2_fast.yaml"
    out = tmp_path / "fig2_fast"
    assert main(['solve', str(config), '--out', str(out)]) == 0
    assert read_manifest(out / "manifest.yaml")['status'] == 'ok'


def csv_contents(root):
    return {path.relative_to(root).as_posix(): path.read_bytes() for path in sorted(root.rglob("*.csv"))}


def test_repeated_solve_and_sweep_write_identical_csvs(tmp_path) -> None:
    path = write_config(tmp_path, STATIC_QUBIT)
    runs = []
    for attempt in ("first", "second"):
        out = tmp_path / attempt
        assert main(['solve', str(path), '--out', str(out / "solve")]) == 0
        assert main(['sweep', str(path), '--param', 'model.flux', '--values', '0.5,1',
                     '--out', str(out / "sweep"), '--workers', '1']) == 0
        runs.append(csv_contents(out))
    assert 'sweep/sweep.csv' in runs[0]
    assert runs[0] == runs[1]
    header = runs[0]['sweep/sweep.csv'].split(b'\n')[0].decode().split(',')
    assert 'seconds' not in header


@pytest.mark.slow
def test_repeated_modulated_solve_writes_identical_csvs(tmp_path) -> None:
    from pathlib import Path

    config = Path(__file__).resolve().parent.parent / "config" / "experiments" / "fig2_fast.yaml"
    runs = []
    for attempt in ("first", "second"):
        out = tmp_path / attempt
        assert main(['solve', str(config), '--out', str(out)]) == 0
        runs.append(csv_contents(out))
    assert runs[0]
    assert runs[0] == runs[1]
