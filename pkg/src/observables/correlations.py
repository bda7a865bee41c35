"""
Two-time correlations of the outgoing field by quantum regression

A conditional operator X at tau_c splits into tr(X) rho_qs plus a traceless
part. The traceless part obeys the homogeneous equation dJ/dtau =
A(tau_c + tau) J and is re-integrated from every tau_c on the grid.
"""

import logging
from concurrent.futures import ThreadPoolExecutor, wait
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

from .amplitudes import emission_samples
from ..core.floquet import FloquetDecomposition, QuasiStationaryState
from ..core.liouvillian import PeriodicGenerator, devectorize, vectorize_operator
from ..models.base import BaseModel
from ..models.qubit import QubitModel
from ..numerics.fourier import trigonometric_interpolate
from ..numerics.ode import integrate_linear_ode
from ..utils.constants import DEFAULT_ATOL, DEFAULT_RTOL, VANISHING_FLUX

logger = logging.getLogger(__name__)

DEFAULT_TAU_C_SAMPLES = 32
G1_METHODS = ('integrate', 'floquet')


@dataclass(frozen=True)
class CorrelationResult:
    """
    Correlation samples on a (tau, tau_c) grid

    Attributes:
        kind: 'g1' or 'g2'
        channel: 'L' or 'R'
        tau: Delays (may include negative values)
        tau_c: Reference times on the period grid
        values: Array (n_tau, n_tau_c); complex for g1, real for g2
        vectors: Propagated regression vectors G or J, (n_tau, n_tau_c, D)
        elastic: g1 only, factorized part
        inelastic: g1 only, fluctuation part
        undefined: g2 only, samples with a vanishing flux in the denominator
        imaginary_residual: g2 only, largest |Im g2| before taking the real part
    """
    kind: str
    channel: str
    tau: np.ndarray
    tau_c: np.ndarray
    values: np.ndarray
    vectors: Optional[np.ndarray] = None
    elastic: Optional[np.ndarray] = None
    inelastic: Optional[np.ndarray] = None
    undefined: Optional[np.ndarray] = None
    imaginary_residual: float = 0.0


@dataclass(frozen=True)
class _ShiftedGenerator:
    """A(tau_c + tau) as a function of tau"""
    generator: PeriodicGenerator
    shift: float

    def apply(self, t: float, y: np.ndarray) -> np.ndarray:
        return self.generator.apply(self.shift + t, y)


def _require_qubit(model: BaseModel) -> None:
    if not isinstance(model, QubitModel):
        raise ValueError(f"observables: correlations are implemented for the qubit model, got {model.kind}")


def _check_channel(channel: str) -> None:
    if channel not in ('L', 'R'):
        raise ValueError(f"Unknown output channel {channel!r}")


def tau_c_indices(state: QuasiStationaryState, n_tau_c: int = DEFAULT_TAU_C_SAMPLES) -> np.ndarray:
    """Uniform subsample of the state grid on [0, T)"""
    if n_tau_c < 1:
        raise ValueError(f"n_tau_c must be positive, got {n_tau_c}")
    stride = max(state.n_grid // n_tau_c, 1)
    return np.arange(0, state.n_grid, stride)


def _delay_magnitudes(tau_grid) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Sorted unique |tau|, the position of each tau among them, and the sign mask"""
    tau = np.asarray(tau_grid, dtype=float)
    if tau.ndim != 1 or len(tau) == 0:
        raise ValueError("tau grid must be a non-empty 1-d array")
    magnitudes, positions = np.unique(np.abs(tau), return_inverse=True)
    return magnitudes, positions, tau < 0


def conditional_propagation(
    gen: PeriodicGenerator,
    state: QuasiStationaryState,
    operator: np.ndarray,
    tau_c: float,
    taus: np.ndarray,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> np.ndarray:
    """
    Traceless part of a conditional operator carried forward in tau

    Args:
        gen: Generator of the model
        state: Quasi-stationary state
        operator: X at tau_c, for example a rho a^+
        tau_c: Reference time
        taus: Sorted nonnegative delays

    Returns:
        Array (len(taus), D) with J(tau) = propagated vec(X) - tr(X) s_qs(tau_c)
    """
    taus = np.asarray(taus, dtype=float)
    reference = state.at(tau_c)[0]
    components, trace = vectorize_operator(operator, state.basis)
    initial = components - trace * reference
    if taus[-1] <= 0.0:
        return np.tile(initial, (len(taus), 1))

    trajectory = integrate_linear_ode(
        _ShiftedGenerator(gen, float(tau_c)), initial, (0.0, float(taus[-1])),
        t_eval=taus, rtol=rtol, atol=atol,
    )
    return trajectory.states[: len(taus)]


def _over_tau_c(task: Callable[[int], np.ndarray], count: int, workers: int) -> list:
    """Run independent per-tau_c tasks, results in index order"""
    if workers <= 1:
        return [task(i) for i in range(count)]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        futures = [executor.submit(task, i) for i in range(count)]
        wait(futures)
    return [future.result() for future in futures]


def _field_amplitude(model: QubitModel, state: QuasiStationaryState, times: np.ndarray, channel: str) -> np.ndarray:
    """<a_alpha>(t) off the grid"""
    ell = emission_samples(model, times)
    coherence = state.at(times)[:, model.emitter_component]
    amplitude = ell * coherence
    return amplitude + np.sqrt(model.flux) if channel == 'R' else amplitude


def g1_correlation(
    model: QubitModel,
    state: QuasiStationaryState,
    floq: Optional[FloquetDecomposition] = None,
    tau_grid=None,
    channel: str = 'L',
    n_tau_c: int = DEFAULT_TAU_C_SAMPLES,
    method: str = 'integrate',
    workers: int = 1,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> CorrelationResult:
    """
    g1_alpha(tau, tau_c) = <a_alpha^+(tau_c + tau) a_alpha(tau_c)>

    The elastic part is <a^+(tau_c + tau)><a(tau_c)>; the inelastic part is
    l*(tau_c + tau) l(tau_c) G1(tau, tau_c) with G1 the <sigma_+> component of
    the regression vector started from sigma_- rho. Negative delays use
    G1(-tau) = G1(tau)*.

    Args:
        model: Qubit model
        state: Quasi-stationary state
        floq: Floquet decomposition, required for method 'floquet'
        tau_grid: Delays
        channel: 'L' or 'R'
        n_tau_c: Number of reference times per period
        method: 'integrate' re-integrates from each tau_c; 'floquet' uses P(t) exp(B tau) P^-1
        workers: Threads over the tau_c grid

    Returns:
        CorrelationResult
    """
    _require_qubit(model)
    _check_channel(channel)
    if method not in G1_METHODS:
        raise ValueError(f"Unknown g1 method {method!r}, expected one of {G1_METHODS}")
    if method == 'floquet' and floq is None:
        raise ValueError("The floquet g1 route needs a FloquetDecomposition")
    if tau_grid is None:
        tau_grid = np.linspace(0.0, state.period, 65)

    magnitudes, positions, negative = _delay_magnitudes(tau_grid)
    indices = tau_c_indices(state, n_tau_c)
    tau_c = state.times[indices]
    gen = model.generator()
    sigma_minus = model.lowering_operator
    raising = model.raising_component

    def regression(i: int) -> np.ndarray:
        k = indices[i]
        rho = devectorize(state.vectors[k], state.basis)
        if method == 'integrate':
            return conditional_propagation(gen, state, sigma_minus @ rho, tau_c[i], magnitudes, rtol, atol)
        return _floquet_regression(floq, state, sigma_minus @ rho, tau_c[i], magnitudes)

    vectors = np.stack(_over_tau_c(regression, len(indices), workers), axis=1)

    later = tau_c[None, :] + magnitudes[:, None]
    ell_later = emission_samples(model, later.ravel()).reshape(later.shape)
    ell_now = emission_samples(model, tau_c)
    inelastic = np.conj(ell_later) * ell_now[None, :] * vectors[:, :, raising]

    amplitude_later = _field_amplitude(model, state, later.ravel(), channel).reshape(later.shape)
    amplitude_now = _field_amplitude(model, state, tau_c, channel)
    elastic = np.conj(amplitude_later) * amplitude_now[None, :]

    def arrange(samples: np.ndarray) -> np.ndarray:
        arranged = samples[positions]
        arranged[negative] = np.conj(arranged[negative])
        return arranged

    elastic, inelastic, vectors = arrange(elastic), arrange(inelastic), arrange(vectors)
    logger.info(f"g1_{channel} computed on {len(positions)} x {len(tau_c)} grid ({method} route)")
    return CorrelationResult(
        kind='g1',
        channel=channel,
        tau=np.asarray(tau_grid, dtype=float),
        tau_c=tau_c,
        values=elastic + inelastic,
        vectors=vectors,
        elastic=elastic,
        inelastic=inelastic,
    )


def _floquet_regression(
    floq: FloquetDecomposition,
    state: QuasiStationaryState,
    operator: np.ndarray,
    tau_c: float,
    taus: np.ndarray
) -> np.ndarray:
    """G(tau) = P(tau_c + tau) exp(B tau) P(tau_c)^-1 G0"""
    reference = state.at(tau_c)[0]
    components, trace = vectorize_operator(operator, state.basis)
    initial = components - trace * reference

    samples = floq.periodic[:-1]
    P_now = trigonometric_interpolate(samples, floq.period, np.array([tau_c]))[0]
    P_later = trigonometric_interpolate(samples, floq.period, np.mod(tau_c + taus, floq.period))
    eigen = floq.eigen
    modal = eigen.left @ np.linalg.solve(P_now, initial)
    evolved = (np.exp(np.outer(taus, eigen.values)) * modal[None, :]) @ eigen.right.T
    return np.einsum('kij,kj->ki', P_later, evolved)


def _number_operator(model: QubitModel, t: np.ndarray, channel: str) -> np.ndarray:
    """n_alpha(t) = a_alpha(t)^+ a_alpha(t), shape (K, N, N)"""
    lowering = _field_operator(model, t, channel)
    return np.einsum('kji,kjl->kil', np.conj(lowering), lowering)


def _field_operator(model: QubitModel, t: np.ndarray, channel: str) -> np.ndarray:
    """a_alpha(t) = l(t) sigma_- (+ sqrt(f) for channel R), shape (K, N, N)"""
    t = np.atleast_1d(np.asarray(t, dtype=float))
    ell = emission_samples(model, t)
    operator = ell[:, None, None] * model.lowering_operator[None, :, :]
    if channel == 'R':
        operator = operator + np.sqrt(model.flux) * np.eye(model.lowering_operator.shape[0])[None, :, :]
    return operator


def g2_correlation(
    model: QubitModel,
    state: QuasiStationaryState,
    tau_grid=None,
    channel: str = 'L',
    n_tau_c: int = DEFAULT_TAU_C_SAMPLES,
    workers: int = 1,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL
) -> CorrelationResult:
    """
    Normalized second-order coherence of one output channel

        g2(tau, tau_c) = 1 + tr[n(t) J(tau)] / (f(tau_c) f(t)),  t = tau_c + tau

    with J the traceless part of a rho a^+ carried forward from tau_c.
    Samples where either flux vanishes are NaN and flagged undefined.
    g2 is real, so negative delays reuse g2(|tau|, tau_c).

    Returns:
        CorrelationResult with real values
    """
    _require_qubit(model)
    _check_channel(channel)
    if tau_grid is None:
        tau_grid = np.linspace(0.0, state.period, 65)

    magnitudes, positions, _ = _delay_magnitudes(tau_grid)
    indices = tau_c_indices(state, n_tau_c)
    tau_c = state.times[indices]
    gen = model.generator()
    field_now = _field_operator(model, tau_c, channel)

    def regression(i: int) -> np.ndarray:
        rho = devectorize(state.vectors[indices[i]], state.basis)
        a = field_now[i]
        return conditional_propagation(gen, state, a @ rho @ a.conj().T, tau_c[i], magnitudes, rtol, atol)

    vectors = np.stack(_over_tau_c(regression, len(indices), workers), axis=1)

    rho_now = devectorize(state.vectors[indices], state.basis)
    number_now = _number_operator(model, tau_c, channel)
    flux_now = np.real(np.einsum('kij,kji->k', number_now, rho_now))

    later = (tau_c[None, :] + magnitudes[:, None]).ravel()
    rho_later = devectorize(state.at(later), state.basis)
    number_later = _number_operator(model, later, channel)
    flux_later = np.real(np.einsum('kij,kji->k', number_later, rho_later)).reshape(len(magnitudes), -1)

    traceless = devectorize(vectors.reshape(-1, state.basis.size), state.basis, trace=0.0)
    excess = np.einsum('kij,kji->k', number_later, traceless).reshape(len(magnitudes), -1)

    threshold = VANISHING_FLUX * max(model.flux, 1.0)
    undefined = (flux_later < threshold) | (flux_now[None, :] < threshold)
    with np.errstate(divide='ignore', invalid='ignore'):
        raw = 1.0 + excess / (flux_now[None, :] * flux_later)
    raw = np.where(undefined, np.nan, raw)

    defined = ~undefined
    residual = float(np.max(np.abs(raw.imag[defined]), initial=0.0))
    if np.any(undefined):
        logger.info(f"g2_{channel}: {int(np.sum(undefined))} samples undefined (vanishing flux)")
    logger.info(f"g2_{channel} computed on {len(positions)} x {len(tau_c)} grid")

    return CorrelationResult(
        kind='g2',
        channel=channel,
        tau=np.asarray(tau_grid, dtype=float),
        tau_c=tau_c,
        values=np.real(raw)[positions],
        vectors=vectors[positions],
        undefined=undefined[positions],
        imaginary_residual=residual,
    )
