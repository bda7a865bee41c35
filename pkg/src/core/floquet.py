"""
Floquet resummation of the quasi-stationary state

One period of the fundamental solution O(t) and the particular solution c(t)
(with c(0) = 0) give the T-periodic long-time state

    rho_qs(tau) = O(tau) (1 - O(T))^-1 c(T) + c(tau)

without propagating through transients.
"""

import logging
import math
import time
from dataclasses import dataclass, field
from typing import Any, Dict, Optional, Tuple

import numpy as np
import scipy.sparse.linalg as spla

from .exceptions import IntegrationError, NonDissipativeError
from .liouvillian import (
    BasisDescriptor,
    DensityVector,
    PeriodicGenerator,
    devectorize,
    dissipation_gap,
)
from ..numerics.fourier import (
    fourier_coefficients,
    period_grid,
    trigonometric_interpolate,
)
from ..numerics.linalg import EigenSystem, eig_biorthonormal, log_eigensystem, slowest_rate
from ..numerics.ode import Trajectory, integrate_linear_ode
from ..utils.constants import (
    DEFAULT_ATOL,
    DEFAULT_GRID,
    DEFAULT_M_MAX,
    DEFAULT_RTOL,
    DENSE_LIMIT,
    GMRES_MAX_ITER,
    GMRES_RTOL,
    GRID_CONVERGENCE_TOL,
    HERMITICITY_TOL,
    ILL_CONDITIONED_RESOLVENT,
    MAX_GRID,
    ORACLE_DECAY_EXPONENT,
    ORACLE_EXTRA_PERIODS,
    ORACLE_MAX_PERIODS,
    POSITIVITY_TOL,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FundamentalSolution:
    """O(t) on the period grid, O(0) = identity"""
    times: np.ndarray
    samples: np.ndarray
    period: float

    @property
    def monodromy(self) -> np.ndarray:
        return self.samples[-1]


@dataclass(frozen=True)
class FloquetDecomposition:
    """
    O(t) = P(t) exp(B t) with T-periodic P and constant B
    """
    B: np.ndarray
    eigen: EigenSystem
    times: np.ndarray
    periodic: np.ndarray
    period: float
    periodicity_error: float = 0.0

    @property
    def exponents(self) -> np.ndarray:
        return self.eigen.values

    @property
    def gamma_min(self) -> float:
        return floquet_gamma_min(self)

    def inverse_apply(self, vectors: np.ndarray) -> np.ndarray:
        """P(t_k)^-1 v_k for every grid point, by dense solves"""
        return np.linalg.solve(self.periodic[: len(vectors)], vectors[..., None])[..., 0]


@dataclass(frozen=True)
class QuasiStationaryState:
    """
    T-periodic state sampled on the uniform grid t_k = k T / M, k = 0..M

    Attributes:
        times: Grid including the endpoint T
        vectors: Reduced state at each grid time, shape (M+1, D)
        basis: Component ordering
        period: T
        m_max: Highest stored harmonic
        fourier: Harmonic m -> coefficient vector
        particular: c(t) samples when computed by resummation
        diagnostics: Periodicity, trace, Hermiticity and positivity checks
    """
    times: np.ndarray
    vectors: np.ndarray
    basis: BasisDescriptor
    period: float
    m_max: int
    fourier: Dict[int, np.ndarray]
    particular: Optional[np.ndarray] = None
    diagnostics: Dict[str, float] = field(default_factory=dict)

    @property
    def n_grid(self) -> int:
        return len(self.times) - 1

    @property
    def grid_times(self) -> np.ndarray:
        """Grid on [0, T) without the endpoint"""
        return self.times[:-1]

    @property
    def grid_vectors(self) -> np.ndarray:
        return self.vectors[:-1]

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    def sample(self, k: int) -> DensityVector:
        return DensityVector(values=self.vectors[k], basis=self.basis)

    def density_matrices(self) -> np.ndarray:
        return devectorize(self.vectors, self.basis)

    def at(self, t) -> np.ndarray:
        """Trigonometric interpolation between grid points"""
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), self.period)
        return trigonometric_interpolate(self.grid_vectors, self.period, t)

    def component(self, index: int) -> np.ndarray:
        return self.vectors[:, index]

    def mean(self) -> np.ndarray:
        return np.mean(self.grid_vectors, axis=0)


@dataclass(frozen=True)
class OracleResult:
    """Final period of a brute-force propagation"""
    times: np.ndarray
    vectors: np.ndarray
    n_periods: int
    residual: float


@dataclass(frozen=True)
class QuasiStationarySolution:
    state: QuasiStationaryState
    decomposition: Optional[FloquetDecomposition]
    diagnostics: Dict[str, Any]


def fundamental_solution(
    gen: PeriodicGenerator,
    n_grid: int = DEFAULT_GRID,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> FundamentalSolution:
    """
    Integrate dO/dt = A(t) O from O(0) = identity over one period

    Raises:
        IntegrationError, DivergenceError: integrator failure
    """
    times = period_grid(gen.period, n_grid)
    identity = np.eye(gen.dimension, dtype=complex)
    trajectory = integrate_linear_ode(gen, identity, (0.0, gen.period), t_eval=times,
                                      rtol=rtol, atol=atol)
    logger.debug(f"Fundamental solution computed (D={gen.dimension}, nfev={trajectory.nfev})")
    return FundamentalSolution(times=trajectory.times, samples=trajectory.states, period=gen.period)


def floquet_decompose(fund: FundamentalSolution) -> FloquetDecomposition:
    """
    B = log(O(T))/T on the principal branch and P(t) = O(t) exp(-B t)

    Raises:
        NonDissipativeError: monodromy eigenvalue modulus >= 1
        DefectiveMatrixError: monodromy not diagonalizable
    """
    eigen = log_eigensystem(fund.monodromy, fund.period)
    B = eigen.reconstruct()
    decay = np.exp(-np.outer(fund.times, eigen.values))
    inverse_exponential = np.einsum('ij,kj,jl->kil', eigen.right, decay, eigen.left)
    periodic = fund.samples @ inverse_exponential

    identity = np.eye(B.shape[0])
    periodicity_error = float(np.max(np.abs(periodic[-1] - identity)))
    if periodicity_error > 1e-8:
        logger.warning(f"P(T) deviates from identity by {periodicity_error:.3e}")

    return FloquetDecomposition(
        B=B,
        eigen=eigen,
        times=fund.times,
        periodic=periodic,
        period=fund.period,
        periodicity_error=periodicity_error,
    )


def static_decomposition(gen: PeriodicGenerator, n_grid: int = DEFAULT_GRID) -> FloquetDecomposition:
    """B = A and P = identity for a time-independent generator"""
    A = gen.A(0.0)
    eigen = eig_biorthonormal(A)
    times = period_grid(gen.period, n_grid)
    periodic = np.broadcast_to(np.eye(gen.dimension, dtype=complex),
                               (len(times), gen.dimension, gen.dimension)).copy()
    return FloquetDecomposition(B=A, eigen=eigen, times=times, periodic=periodic, period=gen.period)


def floquet_gamma_min(decomposition: FloquetDecomposition) -> float:
    """Slowest decay rate -max Re b_j"""
    return slowest_rate(decomposition.exponents)


def particular_solution(
    gen: PeriodicGenerator,
    n_grid: int = DEFAULT_GRID,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> Trajectory:
    """dc/dt = A(t) c + C(t) with c(0) = 0 on the period grid"""
    times = period_grid(gen.period, n_grid)
    return integrate_linear_ode(gen, np.zeros(gen.dimension, dtype=complex), (0.0, gen.period),
                                inhomogeneity=gen.C, t_eval=times, rtol=rtol, atol=atol)


def _state_diagnostics(vectors: np.ndarray, basis: BasisDescriptor) -> Dict[str, float]:
    matrices = devectorize(vectors, basis)
    hermiticity = float(np.max(np.abs(matrices - np.conj(np.swapaxes(matrices, 1, 2)))))
    traces = np.einsum('kii->k', matrices)
    hermitian = 0.5 * (matrices + np.conj(np.swapaxes(matrices, 1, 2)))
    min_eigenvalue = float(np.min(np.linalg.eigvalsh(hermitian)))
    diagnostics = {
        'periodicity_error': float(np.max(np.abs(vectors[-1] - vectors[0]))),
        'trace_error': float(np.max(np.abs(traces - 1.0))),
        'hermiticity_error': hermiticity,
        'min_eigenvalue': min_eigenvalue,
    }
    if hermiticity > HERMITICITY_TOL:
        logger.warning(f"Quasi-stationary state deviates from Hermitian by {hermiticity:.3e}")
    if min_eigenvalue < -POSITIVITY_TOL:
        logger.warning(f"Quasi-stationary state has eigenvalue {min_eigenvalue:.3e} < 0")
    return diagnostics


def build_state(
    times: np.ndarray,
    vectors: np.ndarray,
    basis: BasisDescriptor,
    period: float,
    m_max: int = DEFAULT_M_MAX,
    particular: Optional[np.ndarray] = None,
    extra: Optional[Dict[str, float]] = None
) -> QuasiStationaryState:
    """Assemble a QuasiStationaryState with Fourier data and diagnostics"""
    m_max = min(m_max, (len(times) - 1) // 2 - 1)
    diagnostics = _state_diagnostics(vectors, basis)
    if extra:
        diagnostics.update(extra)
    return QuasiStationaryState(
        times=np.asarray(times),
        vectors=np.asarray(vectors),
        basis=basis,
        period=period,
        m_max=m_max,
        fourier=fourier_coefficients(vectors, m_max, period=period, times=times),
        particular=particular,
        diagnostics=diagnostics,
    )


def quasi_stationary(
    fund: FundamentalSolution,
    c_samples: Trajectory,
    basis: BasisDescriptor,
    m_max: int = DEFAULT_M_MAX
) -> QuasiStationaryState:
    """
    rho_qs(tau) = O(tau) (1 - O(T))^-1 c(T) + c(tau)

    Raises:
        NonDissipativeError: 1 - O(T) singular
    """
    resolvent = np.eye(fund.monodromy.shape[0]) - fund.monodromy
    condition = float(np.linalg.cond(resolvent))
    if not np.isfinite(condition):
        raise NonDissipativeError("floquet", "1 - O(T) is singular (non-decaying mode)")
    if condition > ILL_CONDITIONED_RESOLVENT:
        logger.warning(f"1 - O(T) is ill-conditioned (cond={condition:.3e}), critical slowing down")

    try:
        start = np.linalg.solve(resolvent, c_samples.endpoint)
    except np.linalg.LinAlgError as e:
        raise NonDissipativeError("floquet", f"1 - O(T) is singular: {e}") from e

    vectors = np.einsum('kij,j->ki', fund.samples, start) + c_samples.states
    return build_state(fund.times, vectors, basis, fund.period, m_max,
                       particular=c_samples.states, extra={'resolvent_condition': condition})


def static_quasi_stationary(
    gen: PeriodicGenerator,
    n_grid: int = DEFAULT_GRID,
    m_max: int = DEFAULT_M_MAX
) -> QuasiStationaryState:
    """Steady state -A^-1 C repeated on the grid"""
    steady = gen.solve(0.0, -gen.C(0.0))
    times = period_grid(gen.period, n_grid)
    vectors = np.tile(steady, (len(times), 1))
    return build_state(times, vectors, gen.basis, gen.period, m_max)


def _propagate(gen: PeriodicGenerator, start: np.ndarray, times: Optional[np.ndarray],
               rtol: float, atol: float, source: bool) -> Trajectory:
    return integrate_linear_ode(
        gen, start, (0.0, gen.period),
        inhomogeneity=gen.C if source else None,
        t_eval=times, rtol=rtol, atol=atol,
    )


def periodic_start_krylov(
    gen: PeriodicGenerator,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    guess: Optional[np.ndarray] = None
) -> Tuple[np.ndarray, int]:
    """
    Solve (1 - O(T)) x = c(T) by GMRES with O(T) applied by propagation

    Returns:
        (rho_qs(0), number of one-period propagations)
    """
    dimension = gen.dimension
    endpoint = np.array([gen.period])
    c_end = _propagate(gen, np.zeros(dimension, dtype=complex), endpoint, rtol, atol, True).endpoint

    calls = [0]

    def matvec(x: np.ndarray) -> np.ndarray:
        calls[0] += 1
        x = np.asarray(x, dtype=complex).ravel()
        return x - _propagate(gen, x, endpoint, rtol, atol, False).endpoint

    operator = spla.LinearOperator((dimension, dimension), matvec=matvec, dtype=complex)
    start, info = spla.gmres(operator, c_end, x0=guess, rtol=GMRES_RTOL, atol=0.0,
                             restart=min(dimension, 60), maxiter=GMRES_MAX_ITER)
    if info != 0:
        raise IntegrationError("floquet", f"GMRES for the periodic start did not converge (info={info})")

    logger.debug(f"Krylov periodic start found with {calls[0]} period propagations")
    return np.asarray(start, dtype=complex), calls[0]


def sample_period(
    gen: PeriodicGenerator,
    start: np.ndarray,
    n_grid: int,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> Tuple[np.ndarray, np.ndarray]:
    """Propagate a periodic start through one period on the uniform grid"""
    times = period_grid(gen.period, n_grid)
    trajectory = _propagate(gen, start, times, rtol, atol, True)
    return trajectory.times, trajectory.states


def krylov_quasi_stationary(
    gen: PeriodicGenerator,
    n_grid: int = DEFAULT_GRID,
    m_max: int = DEFAULT_M_MAX,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> QuasiStationaryState:
    """Quasi-stationary state without forming O(t), for large D"""
    guess = gen.solve(0.0, -gen.C(0.0))
    start, calls = periodic_start_krylov(gen, rtol, atol, guess)
    times, vectors = sample_period(gen, start, n_grid, rtol, atol)
    return build_state(times, vectors, gen.basis, gen.period, m_max,
                       extra={'krylov_propagations': float(calls)})


def oracle_periods(gamma_min: float, period: float) -> int:
    """ceil(40 / (gamma_min T)) + 5, capped at 10^6"""
    if gamma_min <= 0 or not np.isfinite(gamma_min):
        return ORACLE_MAX_PERIODS
    periods = math.ceil(ORACLE_DECAY_EXPONENT / (gamma_min * period)) + ORACLE_EXTRA_PERIODS
    return int(min(periods, ORACLE_MAX_PERIODS))


def brute_force_oracle(
    gen: PeriodicGenerator,
    rho0: DensityVector,
    n_periods: int,
    n_grid: int = DEFAULT_GRID,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> OracleResult:
    """
    Propagate d rho/dt = A rho + C through n_periods periods

    Returns:
        Last-period samples and the residual ||rho(nT) - rho((n-1)T)||_inf
    """
    if n_periods < 1:
        raise ValueError(f"n_periods must be >= 1, got {n_periods}")
    endpoint = np.array([gen.period])
    state = np.asarray(rho0.values, dtype=complex)
    for _ in range(n_periods - 1):
        state = _propagate(gen, state, endpoint, rtol, atol, True).endpoint
    times, vectors = sample_period(gen, state, n_grid, rtol, atol)
    residual = float(np.max(np.abs(vectors[-1] - vectors[0])))
    logger.debug(f"Oracle finished after {n_periods} periods (residual {residual:.3e})")
    return OracleResult(times=times, vectors=vectors, n_periods=n_periods, residual=residual)


def _harmonic_change(coarse: QuasiStationaryState, fine: QuasiStationaryState) -> float:
    m_max = min(coarse.m_max, fine.m_max)
    return max(
        float(np.max(np.abs(coarse.fourier[m] - fine.fourier[m])))
        for m in range(-m_max, m_max + 1)
    )


def solve_quasi_stationary(
    gen: PeriodicGenerator,
    n_grid: int = DEFAULT_GRID,
    m_max: int = DEFAULT_M_MAX,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    grid_convergence: bool = True,
    oracle: bool = False,
    dense_limit: int = DENSE_LIMIT,
    max_grid: int = MAX_GRID
) -> QuasiStationarySolution:
    """
    Quasi-stationary state by the cheapest exact route

    Static generators use -A^-1 C, small ones the dense resummation, large
    ones the Krylov periodic start. The grid is doubled until harmonics up
    to m_max change by less than the convergence tolerance.

    Returns:
        QuasiStationarySolution with state, decomposition (dense/static only) and diagnostics
    """
    started = time.perf_counter()
    diagnostics: Dict[str, Any] = {'dimension': gen.dimension}

    decomposition = None
    if gen.is_static:
        route = 'static'
        state = static_quasi_stationary(gen, n_grid, m_max)
        if gen.dimension <= dense_limit:
            decomposition = static_decomposition(gen, n_grid)
            gamma_min = floquet_gamma_min(decomposition)
        else:
            gamma_min = dissipation_gap(gen.operator(0.0))
    elif gen.dimension <= dense_limit:
        route = 'dense'
        fund = fundamental_solution(gen, n_grid, rtol, atol)
        decomposition = floquet_decompose(fund)
        state = quasi_stationary(fund, particular_solution(gen, n_grid, rtol, atol), gen.basis, m_max)
        gamma_min = floquet_gamma_min(decomposition)
    else:
        route = 'krylov'
        state = krylov_quasi_stationary(gen, n_grid, m_max, rtol, atol)
        times = np.linspace(0.0, gen.period, 16, endpoint=False)
        gamma_min = dissipation_gap(gen.averaged(times)[0])
    diagnostics['route'] = route
    diagnostics['gamma_min'] = gamma_min
    logger.info(f"Quasi-stationary state solved via {route} route (D={gen.dimension}, gamma_min={gamma_min:.4g})")

    if grid_convergence and not gen.is_static:
        current = state
        change = float("nan")
        while True:
            if 2 * current.n_grid > max_grid:
                logger.warning(f"Grid doubling stopped at the cap of {max_grid} samples")
                break
            times, vectors = sample_period(gen, current.vectors[0], 2 * current.n_grid, rtol, atol)
            finer = build_state(times, vectors, gen.basis, gen.period, m_max, extra=_carried(state))
            change = _harmonic_change(current, finer)
            logger.debug(f"Grid {current.n_grid} -> {finer.n_grid}: harmonic change {change:.3e}")
            if change < GRID_CONVERGENCE_TOL:
                break
            current = finer
        if current is not state:
            state = current
            decomposition = None if route != 'dense' else _refine_decomposition(gen, state.n_grid, rtol, atol)
        diagnostics['harmonic_change'] = change
    diagnostics['grid'] = state.n_grid

    if oracle:
        n_periods = oracle_periods(gamma_min, gen.period)
        rho0 = DensityVector(np.zeros(gen.dimension, dtype=complex), gen.basis)
        result = brute_force_oracle(gen, rho0, n_periods, state.n_grid, rtol, atol)
        deviation = float(np.max(np.abs(result.vectors - state.vectors)))
        diagnostics.update({
            'oracle_periods': n_periods,
            'oracle_residual': result.residual,
            'oracle_deviation': deviation,
        })
        logger.info(f"Oracle: {n_periods} periods, residual {result.residual:.3e}, deviation {deviation:.3e}")

    diagnostics.update(state.diagnostics)
    logger.debug(f"Quasi-stationary solve took {time.perf_counter() - started:.3f} s")
    return QuasiStationarySolution(state=state, decomposition=decomposition, diagnostics=diagnostics)


def _refine_decomposition(gen: PeriodicGenerator, n_grid: int, rtol: float, atol: float) -> FloquetDecomposition:
    return floquet_decompose(fundamental_solution(gen, n_grid, rtol, atol))


def _carried(state: QuasiStationaryState) -> Dict[str, float]:
    keys = ('resolvent_condition', 'krylov_propagations')
    return {key: state.diagnostics[key] for key in keys if key in state.diagnostics}
