"""
Linear ODE integration
Wraps scipy's embedded Runge-Kutta integrators for dy/dt = A(t) y + C(t)
with matrix- or vector-valued states
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Sequence, Tuple

import numpy as np
from scipy.integrate import solve_ivp

from ..core.exceptions import DivergenceError, IntegrationError
from ..utils.constants import DEFAULT_ATOL, DEFAULT_METHOD, DEFAULT_RTOL

logger = logging.getLogger(__name__)

MatrixFunction = Callable[[float], np.ndarray]
VectorFunction = Callable[[float], np.ndarray]


@dataclass(frozen=True)
class Trajectory:
    """
    Samples of an ODE solution

    Attributes:
        times: Strictly increasing sample times, times[0] is the span start
        states: Array of shape (len(times), *state_shape)
        interpolation: How values between samples are obtained
        error_estimate: Endpoint error estimate (nan if not requested)
        nfev: Right-hand-side evaluations used
    """
    times: np.ndarray
    states: np.ndarray
    interpolation: str = "trigonometric"
    error_estimate: float = float("nan")
    nfev: int = 0
    dense: Optional[Any] = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        if self.times.ndim != 1 or len(self.times) < 1:
            raise ValueError("Trajectory times must be a non-empty 1-D array")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("Trajectory times must be strictly increasing")
        if self.states.shape[0] != len(self.times):
            raise ValueError("Trajectory states must have one sample per time")

    @property
    def endpoint(self) -> np.ndarray:
        return self.states[-1]

    def __call__(self, t: float) -> np.ndarray:
        """Evaluate between samples using the integrator's dense output"""
        if self.dense is None:
            raise ValueError("Trajectory was built without dense output")
        shape = self.states.shape[1:]
        return np.asarray(self.dense(t)).reshape(shape)


def _make_rhs(
    generator: Any,
    inhomogeneity: Optional[VectorFunction],
    shape: Tuple[int, ...]
) -> Callable[[float, np.ndarray], np.ndarray]:
    """
    Build the flat right-hand side for solve_ivp

    Generators exposing ``apply(t, y)`` are used without forming A(t);
    plain callables must return the matrix A(t).
    """
    apply = getattr(generator, "apply", None)

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        state = y.reshape(shape)
        if apply is not None:
            derivative = apply(t, state)
        else:
            derivative = generator(t) @ state
        if inhomogeneity is not None:
            source = np.asarray(inhomogeneity(t))
            if state.ndim == 2:
                source = source[:, None]
            derivative = derivative + source
        return np.asarray(derivative).ravel()

    return rhs


def _run(
    rhs: Callable,
    y0: np.ndarray,
    span: Sequence[float],
    t_eval: Optional[np.ndarray],
    rtol: float,
    atol: float,
    method: str,
    dense_output: bool
):
    result = solve_ivp(
        rhs,
        (float(span[0]), float(span[1])),
        y0.ravel().astype(complex),
        method=method,
        t_eval=t_eval,
        rtol=rtol,
        atol=atol,
        dense_output=dense_output,
    )

    if result.status == -1:
        if "step size" in (result.message or "").lower():
            raise IntegrationError(
                "numerics",
                f"step-size underflow at t={result.t[-1]:.6g}: {result.message}"
            )
        raise IntegrationError("numerics", f"integration failed: {result.message}")

    if not np.all(np.isfinite(result.y)):
        raise DivergenceError("numerics", "non-finite state encountered during integration")

    return result


def integrate_linear_ode(
    generator: Any,
    y0: np.ndarray,
    span: Sequence[float],
    inhomogeneity: Optional[VectorFunction] = None,
    t_eval: Optional[np.ndarray] = None,
    rtol: float = DEFAULT_RTOL,
    atol: float = DEFAULT_ATOL,
    method: str = DEFAULT_METHOD,
    estimate_error: bool = False,
    dense_output: bool = False
) -> Trajectory:
    """
    Integrate dy/dt = A(t) y + C(t) over span

    Args:
        generator: Callable t -> A(t), or an object with ``apply(t, y)``
        y0: Initial vector (D,) or matrix (D, K)
        span: (t0, t1) with t1 > t0
        inhomogeneity: Optional callable t -> C(t)
        t_eval: Sample times; the endpoint t1 is always included
        rtol: Relative tolerance
        atol: Absolute tolerance
        method: solve_ivp method name
        estimate_error: Re-integrate at tol/10 and report the endpoint difference
        dense_output: Keep the continuous solution for between-sample evaluation

    Returns:
        Trajectory with the requested samples

    Raises:
        IntegrationError: step-size underflow or integrator failure
        DivergenceError: non-finite state
    """
    if rtol <= 0 or atol <= 0:
        raise ValueError(f"Tolerances must be positive (rtol={rtol}, atol={atol})")
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise ValueError(f"Integration span must be increasing: {span}")

    y0 = np.asarray(y0, dtype=complex)
    shape = y0.shape

    if t_eval is not None:
        t_eval = np.asarray(t_eval, dtype=float)
        if t_eval[-1] < t1:
            t_eval = np.append(t_eval, t1)
        # solve_ivp rejects samples outside the span by a rounding hair
        t_eval = np.clip(t_eval, t0, t1)

    rhs = _make_rhs(generator, inhomogeneity, shape)
    result = _run(rhs, y0, (t0, t1), t_eval, rtol, atol, method, dense_output)
    states = result.y.T.reshape((len(result.t),) + shape)

    error = float("nan")
    if estimate_error:
        refined = _run(rhs, y0, (t0, t1), None, rtol / 10, atol / 10, method, False)
        difference = np.max(np.abs(refined.y[:, -1] - result.y[:, -1]))
        error = max(2.0 * float(difference), np.finfo(float).eps * float(np.max(np.abs(result.y[:, -1]), initial=1.0)))

    logger.debug(f"Integrated span [{t0:.6g}, {t1:.6g}] with {result.nfev} evaluations")

    return Trajectory(
        times=np.asarray(result.t, dtype=float),
        states=states,
        interpolation="dense" if dense_output else "trigonometric",
        error_estimate=error,
        nfev=int(result.nfev),
        dense=result.sol if dense_output else None,
    )
