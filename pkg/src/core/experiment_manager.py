"""
Experiment manager module
Runs one experiment config: model, quasi-stationary solve, requested outputs
"""

import logging
import time
from pathlib import Path
from typing import Any, Callable, Dict, List, Optional

import numpy as np

from .exceptions import FloquetError
from .expansions import adiabatic_expansion, high_frequency_expansion, weak_power_reflection
from .floquet import QuasiStationarySolution, solve_quasi_stationary
from .liouvillian import PeriodicGenerator, devectorize, dissipation_gap
from ..models.base import BaseModel
from ..models.kerr import KerrModel, ensure_truncation
from ..models.registry import build_model
from ..observables.amplitudes import (
    emission_samples,
    output_fluxes,
    power_conservation,
    reflection_transmission,
)
from ..observables.correlations import g1_correlation, g2_correlation
from ..observables.kerr import KerrObservables, kerr_observables
from ..observables.scan import static_scan
from ..observables.spectra import elastic_spectrum, inelastic_spectrum, spectrum_density
from ..storage.base import Table
from ..storage.csv_writer import CsvWriter
from ..storage.manifest import RunManifest, write_manifest
from ..utils.constants import DENSE_LIMIT, MANIFEST_NAME, MODEL_KERR, MODEL_LAMBDA
from ..utils.experiment_config import ExperimentConfig, OutputRequest, config_to_dict, scan_values
from ..utils.helpers import format_duration

logger = logging.getLogger(__name__)

# Output defaults
DEFAULT_WINDOW = (-40.0, 40.0)
DEFAULT_SPECTRUM_POINTS = 801
DEFAULT_TAU_SAMPLES = 101
GAP_SAMPLES = 64


class ExperimentManager:
    """
    Manages a single experiment run
    Writes one CSV per requested output and the manifest last
    """

    def __init__(
        self,
        config: ExperimentConfig,
        out_dir,
        workers: int = 1,
        oracle: bool = False,
        dense_limit: int = DENSE_LIMIT
    ):
        """
        Initialize experiment manager

        Args:
            config: Validated experiment config
            out_dir: Output directory (created if missing)
            workers: Threads for correlation grids
            oracle: Force the brute-force oracle check
            dense_limit: Reduced dimension above which the Krylov route is used
        """
        self.config = config
        self.out_dir = Path(out_dir)
        self.workers = workers
        self.oracle = oracle or config.solver.oracle
        self.dense_limit = dense_limit

        self.model: Optional[BaseModel] = None
        self.generator: Optional[PeriodicGenerator] = None
        self.solution: Optional[QuasiStationarySolution] = None
        self.output_diagnostics: Dict[str, Dict[str, Any]] = {}
        self._kerr_observables: Optional[KerrObservables] = None
        logger.info(f"ExperimentManager initialized for '{config.name}'")

    def run(self) -> RunManifest:
        """
        Execute the experiment

        Returns:
            RunManifest (also written to out_dir/manifest.yaml)

        Raises:
            FloquetError: solver failure (outputs of this run are removed)
        """
        started = time.perf_counter()
        writer = CsvWriter(self.out_dir)
        manifest = RunManifest(config=config_to_dict(self.config))

        try:
            stage = time.perf_counter()
            self._prepare()
            manifest.timings['solve'] = time.perf_counter() - stage

            for request in self.config.outputs:
                stage = time.perf_counter()
                for table in self._handler(request.name)(request):
                    path = writer.write(table)
                    manifest.add_file(path, table)
                manifest.timings[request.name] = time.perf_counter() - stage

            manifest.diagnostics = self._diagnostics()
            manifest.timings['total'] = time.perf_counter() - started
            write_manifest(self.out_dir, manifest)
        except Exception as e:
            logger.error(f"Experiment '{self.config.name}' failed: {e}", exc_info=True)
            writer.remove_written()
            (self.out_dir / MANIFEST_NAME).unlink(missing_ok=True)
            raise

        logger.info(
            f"Experiment '{self.config.name}' finished in {format_duration(manifest.timings['total'])}: "
            f"{len(manifest.files)} files in {self.out_dir}"
        )
        return manifest

    def _prepare(self) -> None:
        cfg = self.config
        model = build_model(cfg.model.kind, cfg.model.parameters, cfg.protocol, n_max=cfg.solver.n_max)
        if isinstance(model, KerrModel):
            model, truncation = ensure_truncation(model)
            self.output_diagnostics['truncation'] = truncation
        self.model = model
        self.generator = model.generator()
        self.solution = solve_quasi_stationary(
            self.generator,
            n_grid=cfg.solver.grid,
            m_max=cfg.solver.m_max,
            rtol=cfg.solver.rtol,
            atol=cfg.solver.atol,
            grid_convergence=cfg.solver.grid_convergence,
            oracle=self.oracle,
            dense_limit=self.dense_limit,
            max_grid=cfg.solver.max_grid,
        )

    def _diagnostics(self) -> Dict[str, Any]:
        diagnostics = dict(self.solution.diagnostics)
        diagnostics['outputs'] = self.output_diagnostics
        return diagnostics

    def _handler(self, name: str) -> Callable[[OutputRequest], List[Table]]:
        handler = getattr(self, f"_output_{name}", None)
        if handler is None:
            raise ValueError(f"No handler for output '{name}'")
        return handler

    @property
    def state(self):
        return self.solution.state

    def _phase(self, times: np.ndarray) -> np.ndarray:
        return np.asarray(times) / self.state.period

    def _headline(self, times: np.ndarray, vectors: np.ndarray) -> Dict[str, np.ndarray]:
        """The model's main observable from reduced vectors"""
        model = self.model
        if model.kind == MODEL_KERR:
            rho = devectorize(vectors, self.state.basis)
            levels = np.arange(model.dimension, dtype=float)
            return {'occupation': np.real(np.einsum('kii,i->k', rho, levels))}

        index = model.emitter_component
        coherence = vectors[:, index] / self.state.basis.scales[index]
        amplitude = emission_samples(model, times) * coherence
        if model.flux <= 0:
            return {'emission': np.abs(amplitude) ** 2}
        R = amplitude / np.sqrt(model.flux)
        if model.kind == MODEL_LAMBDA:
            return {'abs_T2': np.abs(1.0 + R) ** 2}
        return {'abs_R2': np.abs(R) ** 2}

    # --- common outputs ---

    def _output_state(self, request: OutputRequest) -> List[Table]:
        state = self.state
        columns: Dict[str, np.ndarray] = {'tau_c/T': self._phase(state.times)}
        if self.model.kind == MODEL_KERR:
            rho = state.density_matrices()
            for n in range(self.model.dimension):
                columns[f"P_{n}"] = np.real(rho[:, n, n])
        else:
            for k, label in enumerate(state.basis.labels):
                columns[f"re_{label}"] = np.real(state.vectors[:, k])
                columns[f"im_{label}"] = np.imag(state.vectors[:, k])
        return [Table.from_columns('state', columns, "Quasi-stationary state over one period")]

    def _output_floquet(self, request: OutputRequest) -> List[Table]:
        decomposition = self.solution.decomposition
        if decomposition is None:
            logger.warning("No Floquet decomposition on the Krylov route, reporting the averaged-generator gap only")
            self.output_diagnostics['floquet'] = {'gamma_min': self.solution.diagnostics['gamma_min']}
            return [Table.from_columns('floquet', {
                'mode': [0], 're_b': [-self.solution.diagnostics['gamma_min']], 'im_b': [np.nan],
            }, "Slowest decay rate (exponents unavailable)")]

        exponents = decomposition.exponents
        self.output_diagnostics['floquet'] = {
            'gamma_min': decomposition.gamma_min,
            'periodicity_error': decomposition.periodicity_error,
            'eigenvector_condition': decomposition.eigen.condition,
        }
        return [Table.from_columns('floquet', {
            'mode': np.arange(len(exponents)),
            're_b': np.real(exponents),
            'im_b': np.imag(exponents),
        }, "Floquet exponents b_j in units of gamma")]

    def _output_gamma_min(self, request: OutputRequest) -> List[Table]:
        gen = self.generator
        if gen.is_static:
            times = np.array([0.0])
        else:
            times = np.linspace(0.0, gen.period, min(GAP_SAMPLES, self.config.solver.grid), endpoint=False)
        frozen = np.array([dissipation_gap(gen.operator(t)) for t in times])
        overall = self.solution.diagnostics['gamma_min']
        self.output_diagnostics['gamma_min'] = {
            'floquet': overall,
            'frozen_min': float(np.min(frozen)),
            'omega': self.model.omega,
        }
        return [Table.from_columns('gamma_min', {
            'tau_c/T': self._phase(times),
            'gamma_min_frozen': frozen,
            'gamma_min_floquet': np.full(len(times), overall),
        }, "Instantaneous and Floquet dissipation gaps")]

    def _output_adiabatic(self, request: OutputRequest) -> List[Table]:
        order = request.option('order', 1)
        result = adiabatic_expansion(self.generator, order=order, n_grid=self.config.solver.grid)
        exact = self._headline(result.times, self.state.at(result.times))
        approx = self._headline(result.times, result.result)
        columns: Dict[str, np.ndarray] = {'tau_c/T': self._phase(result.times)}
        for name in exact:
            columns[f"{name}_adiabatic"] = approx[name]
            columns[f"{name}_exact"] = exact[name]
        columns['gamma_min'] = result.gamma_min
        columns['valid'] = result.valid.astype(float)
        columns['singular'] = result.singular.astype(float)
        self.output_diagnostics['adiabatic'] = {
            'order': order,
            'valid_fraction': float(np.mean(result.valid[:-1])),
            'singular_points': int(np.sum(result.singular[:-1])),
        }
        return [Table.from_columns('adiabatic', columns, f"Adiabatic approximation, order {order}")]

    def _output_high_frequency(self, request: OutputRequest) -> List[Table]:
        order = request.option('order', 1)
        result = high_frequency_expansion(self.generator, order=order, n_grid=self.config.solver.grid)
        exact = self._headline(result.times, self.state.at(result.times))
        approx = self._headline(result.times, result.assembled)
        columns: Dict[str, np.ndarray] = {'tau_c/T': self._phase(result.times)}
        for name in exact:
            columns[f"{name}_high_frequency"] = approx[name]
            columns[f"{name}_exact"] = exact[name]
            scale = max(float(np.max(np.abs(exact[name]))), np.finfo(float).tiny)
            self.output_diagnostics['high_frequency'] = {
                'order': order,
                'relative_deviation': float(np.max(np.abs(approx[name] - exact[name])) / scale),
            }
        return [Table.from_columns('high_frequency', columns, f"High-frequency approximation, order {order}")]

    def _output_static_scan(self, request: OutputRequest) -> List[Table]:
        parameter = request.option('parameter')
        result = static_scan(self.model, parameter, scan_values(request.option('values')))
        columns: Dict[str, np.ndarray] = {parameter: result.values, 'gamma_min': result.gamma_min}
        columns.update(result.columns)
        if 'occupation' in result.columns:
            peak = int(np.argmax(result.columns['occupation']))
            slowest = int(np.argmin(result.gamma_min))
            self.output_diagnostics['static_scan'] = {
                'occupation_peak_at': float(result.values[peak]),
                'gamma_min_dip_at': float(result.values[slowest]),
            }
        return [Table.from_columns('static_scan', columns, f"Static scan over {parameter}")]

    # --- waveguide outputs ---

    def _output_reflection(self, request: OutputRequest) -> List[Table]:
        trace = reflection_transmission(self.model, self.state)
        return [Table.from_columns('reflection', {
            'tau_c/T': self._phase(trace.times),
            're_R': np.real(trace.R),
            'im_R': np.imag(trace.R),
            'abs_R2': trace.reflectance,
            're_T': np.real(trace.T),
            'im_T': np.imag(trace.T),
            'abs_T2': trace.transmittance,
        }, "Reflection and transmission amplitudes")]

    def _output_fluxes(self, request: OutputRequest) -> List[Table]:
        fluxes = output_fluxes(self.model, self.state)
        self.output_diagnostics['fluxes'] = power_conservation(fluxes)
        return [Table.from_columns('fluxes', {
            'tau_c/T': self._phase(fluxes.times),
            'f_L': fluxes.left,
            'f_R': fluxes.right,
            'elastic_L': fluxes.elastic_left,
            'elastic_R': fluxes.elastic_right,
            'inelastic': fluxes.inelastic,
        }, "Outgoing photon fluxes in units of gamma")]

    def _output_elastic_spectrum(self, request: OutputRequest) -> List[Table]:
        channel = request.option('channel', 'L')
        result = elastic_spectrum(reflection_transmission(self.model, self.state), channel,
                                  omega0=getattr(self.model, 'omega0', 0.0))
        return [Table.from_columns('elastic_spectrum', {
            'm': [line.harmonic for line in result.elastic],
            'delta/gamma': [line.offset for line in result.elastic],
            'weight': [line.weight for line in result.elastic],
        }, f"Elastic lines at omega0 + m Omega, channel {channel}")]

    def _output_spectrum(self, request: OutputRequest) -> List[Table]:
        channel = request.option('channel', 'L')
        low, high = request.option('window', DEFAULT_WINDOW)
        frequencies = np.linspace(low, high, request.option('points', DEFAULT_SPECTRUM_POINTS))
        decomposition = self.solution.decomposition
        if decomposition is None:
            raise FloquetError("observables", "inelastic spectrum needs a Floquet decomposition")

        inelastic = inelastic_spectrum(self.model, self.state, decomposition,
                                       m_max=request.option('m_max'), channel=channel)
        density, residual = spectrum_density(inelastic, frequencies)
        elastic = elastic_spectrum(reflection_transmission(self.model, self.state), channel)
        parseval = abs(inelastic.inelastic_weight.real - inelastic.mean_inelastic_flux)
        self.output_diagnostics['spectrum'] = {
            'imaginary_residual': residual,
            'parseval_residual': parseval,
            'inelastic_weight': inelastic.inelastic_weight.real,
        }
        return [
            Table.from_columns('spectrum', {
                'delta/gamma': frequencies,
                'S_inelastic': density,
            }, f"Inelastic spectral density, channel {channel}"),
            Table.from_columns('spectrum_lines', {
                'm': [line.harmonic for line in elastic.elastic],
                'delta/gamma': [line.offset for line in elastic.elastic],
                'weight': [line.weight for line in elastic.elastic],
            }, f"Elastic delta lines, channel {channel}"),
        ]

    def _tau_grid(self, request: OutputRequest) -> np.ndarray:
        tau_max = request.option('tau_max', self.state.period)
        return np.linspace(0.0, tau_max, request.option('n_tau', DEFAULT_TAU_SAMPLES))

    def _correlation_columns(self, result) -> Dict[str, np.ndarray]:
        tau, tau_c = np.meshgrid(result.tau, result.tau_c, indexing='ij')
        return {'tau/T': self._phase(tau.ravel()), 'tau_c/T': self._phase(tau_c.ravel())}

    def _output_g1(self, request: OutputRequest) -> List[Table]:
        channel = request.option('channel', 'L')
        result = g1_correlation(
            self.model, self.state, self.solution.decomposition, self._tau_grid(request),
            channel=channel, n_tau_c=request.option('n_tau_c', 32),
            method=request.option('method', 'integrate'), workers=self.workers,
            rtol=self.config.solver.rtol, atol=self.config.solver.atol,
        )
        columns = self._correlation_columns(result)
        for name, values in (('g1', result.values), ('elastic', result.elastic), ('inelastic', result.inelastic)):
            columns[f"re_{name}"] = np.real(values).ravel()
            columns[f"im_{name}"] = np.imag(values).ravel()
        return [Table.from_columns('g1', columns, f"First-order correlation, channel {channel}")]

    def _output_g2(self, request: OutputRequest) -> List[Table]:
        channel = request.option('channel', 'L')
        result = g2_correlation(
            self.model, self.state, self._tau_grid(request),
            channel=channel, n_tau_c=request.option('n_tau_c', 32), workers=self.workers,
            rtol=self.config.solver.rtol, atol=self.config.solver.atol,
        )
        self.output_diagnostics['g2'] = {
            'imaginary_residual': result.imaginary_residual,
            'undefined_samples': int(np.sum(result.undefined)),
            'max': float(np.nanmax(result.values)),
            'min': float(np.nanmin(result.values)),
        }
        columns = self._correlation_columns(result)
        columns['g2'] = result.values.ravel()
        columns['undefined'] = result.undefined.ravel().astype(float)
        return [Table.from_columns('g2', columns, f"Second-order coherence, channel {channel}")]

    def _output_weak_power(self, request: OutputRequest) -> List[Table]:
        result = weak_power_reflection(self.model, n_grid=request.option('grid', 8192))
        index = self.model.emitter_component
        exact = self.state.at(result.times)[:, index] / self.state.basis.scales[index]
        scale = max(float(np.max(np.abs(exact))), np.finfo(float).tiny)
        self.output_diagnostics['weak_power'] = {
            'relative_deviation': float(np.max(np.abs(result.s2 - exact)) / scale),
        }
        return [Table.from_columns('weak_power', {
            'tau_c/T': self._phase(result.times),
            're_s2_weak': np.real(result.s2),
            'im_s2_weak': np.imag(result.s2),
            're_s2_exact': np.real(exact),
            'im_s2_exact': np.imag(exact),
        }, "Linear-response coherence versus the exact solution")]

    # --- Kerr outputs ---

    def _kerr(self) -> KerrObservables:
        if self._kerr_observables is None:
            self._kerr_observables = kerr_observables(self.state, self.model)
        return self._kerr_observables

    def _output_occupation(self, request: OutputRequest) -> List[Table]:
        observables = self._kerr()
        self.output_diagnostics['occupation'] = {'peak': observables.peak_occupation}
        return [Table.from_columns('occupation', {
            'tau_c/T': self._phase(observables.times),
            'detuning': observables.detuning,
            'occupation': observables.occupation,
        }, "Cavity occupation <b^+ b>")]

    def _output_entropy(self, request: OutputRequest) -> List[Table]:
        observables = self._kerr()
        self.output_diagnostics['entropy'] = {'max': float(np.max(observables.entropy))}
        return [Table.from_columns('entropy', {
            'tau_c/T': self._phase(observables.times),
            'entropy': observables.entropy,
        }, "Von Neumann entropy")]

    def _output_hysteresis(self, request: OutputRequest) -> List[Table]:
        observables = self._kerr()
        self.output_diagnostics['hysteresis'] = {
            'loop_area': observables.loop_area,
            'loop_area_abs': observables.loop_area_abs,
        }
        return [Table.from_columns('hysteresis', {
            'detuning': observables.detuning,
            'occupation': observables.occupation,
        }, "Parametric curve (detuning, occupation) over one period")]


def run_experiment(
    cfg: ExperimentConfig,
    out_dir,
    workers: int = 1,
    oracle: bool = False,
    dense_limit: int = DENSE_LIMIT
) -> RunManifest:
    """
    Run one experiment and write its outputs

    Args:
        cfg: Validated config
        out_dir: Output directory

    Returns:
        RunManifest
    """
    manager = ExperimentManager(cfg, out_dir, workers=workers, oracle=oracle, dense_limit=dense_limit)
    return manager.run()
