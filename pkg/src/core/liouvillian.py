"""
Lindblad generators in the reduced (trace-eliminated) representation

The density matrix is stacked into a vector, the ground-state population
rho_00 = 1 - sum_i rho_ii is eliminated, and the remaining D = N^2 - 1
components obey the affine system d rho/dt = A(t) rho + C(t).
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Sequence, Tuple, Union

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .exceptions import SingularGeneratorError
from ..utils.constants import DENSE_LIMIT, HERMITICITY_TOL

logger = logging.getLogger(__name__)

Coefficient = Callable[[float], complex]
Operator = Union[np.ndarray, sp.spmatrix]


@dataclass(frozen=True)
class BasisDescriptor:
    """
    Ordering of reduced vector components

    Component k equals scales[k] * rho[elements[k]]. The element (0, 0) is
    the eliminated one; every other matrix element appears exactly once.
    """
    dimension: int
    elements: Tuple[Tuple[int, int], ...]
    scales: Tuple[complex, ...]
    labels: Tuple[str, ...]

    def __post_init__(self):
        n = self.dimension
        if n < 2:
            raise ValueError(f"Hilbert-space dimension must be >= 2, got {n}")
        expected = {(i, j) for i in range(n) for j in range(n)} - {(0, 0)}
        if len(self.elements) != n * n - 1 or set(self.elements) != expected:
            raise ValueError("Basis must list every matrix element except (0, 0) exactly once")
        if len(self.scales) != len(self.elements) or len(self.labels) != len(self.elements):
            raise ValueError("Basis scales and labels must match the element list")
        if any(scale == 0 for scale in self.scales):
            raise ValueError("Basis scales must be nonzero")

    @property
    def size(self) -> int:
        return len(self.elements)

    @property
    def rows(self) -> np.ndarray:
        return np.array([i for i, _ in self.elements], dtype=int)

    @property
    def cols(self) -> np.ndarray:
        return np.array([j for _, j in self.elements], dtype=int)

    @property
    def scale_array(self) -> np.ndarray:
        return np.asarray(self.scales, dtype=complex)

    @property
    def stacked_indices(self) -> np.ndarray:
        """Positions in the column-stacked full vector"""
        return self.rows + self.dimension * self.cols

    @property
    def diagonal_markers(self) -> np.ndarray:
        """E: 1 for diagonal elements, 0 otherwise"""
        return (self.rows == self.cols).astype(float)

    def index(self, element: Tuple[int, int]) -> int:
        return self.elements.index(tuple(element))


def column_stacked_basis(dimension: int) -> BasisDescriptor:
    """Column-stacked ordering of all elements except (0, 0), unit scales"""
    elements = tuple(
        (i, j) for j in range(dimension) for i in range(dimension) if (i, j) != (0, 0)
    )
    return BasisDescriptor(
        dimension=dimension,
        elements=elements,
        scales=tuple(1.0 for _ in elements),
        labels=tuple(f"rho[{i},{j}]" for i, j in elements),
    )


@dataclass(frozen=True)
class HamiltonianTerm:
    """
    One term c(t) * H_k of the effective Hamiltonian

    A missing coefficient means the term is static.
    """
    operator: np.ndarray
    coefficient: Optional[Coefficient] = None
    label: str = ""

    def value(self, t: float) -> complex:
        return 1.0 if self.coefficient is None else self.coefficient(t)


@dataclass(frozen=True)
class LindbladSpec:
    """
    Data of a single-channel Lindblad equation

    d rho/dt = -i[H(t), rho] + gamma(t) (O rho O^+ - {O^+ O, rho}/2)
    """
    dimension: int
    hamiltonian_terms: Tuple[HamiltonianTerm, ...]
    jump: np.ndarray
    rate: Callable[[float], float]
    period: float
    basis: BasisDescriptor
    static: bool = False

    def hamiltonian(self, t: float) -> np.ndarray:
        result = np.zeros((self.dimension, self.dimension), dtype=complex)
        for term in self.hamiltonian_terms:
            result += term.value(t) * np.asarray(term.operator, dtype=complex)
        return result


@dataclass(frozen=True)
class GeneratorPiece:
    """Constant contribution coefficient(t) * (matrix, vector) to (A, C)"""
    matrix: Operator
    vector: np.ndarray
    coefficient: Optional[Coefficient] = None
    label: str = ""

    def value(self, t: float) -> complex:
        return 1.0 if self.coefficient is None else self.coefficient(t)


@dataclass(frozen=True)
class PeriodicGenerator:
    """
    The pair (A(t), C(t)) of the reduced equation, stored as a finite sum of
    time-dependent coefficients times constant pieces
    """
    period: float
    basis: BasisDescriptor
    markers: np.ndarray
    pieces: Tuple[GeneratorPiece, ...]
    static: bool = False
    label: str = field(default="", compare=False)

    @property
    def dimension(self) -> int:
        return self.basis.size

    @property
    def is_static(self) -> bool:
        return self.static

    @property
    def is_sparse(self) -> bool:
        return any(sp.issparse(piece.matrix) for piece in self.pieces)

    @property
    def omega(self) -> float:
        return 2.0 * np.pi / self.period

    def coefficients(self, t: float) -> List[complex]:
        return [piece.value(t) for piece in self.pieces]

    def operator(self, t: float) -> Operator:
        """A(t) in the storage format of the pieces (dense or sparse)"""
        total = None
        for weight, piece in zip(self.coefficients(t), self.pieces):
            if weight == 0:
                continue
            term = weight * piece.matrix
            total = term if total is None else total + term
        if total is None:
            total = self.pieces[0].matrix * 0.0
        return total.tocsr() if sp.issparse(total) else total

    def A(self, t: float) -> np.ndarray:
        """Dense A(t)"""
        matrix = self.operator(t)
        return matrix.toarray() if sp.issparse(matrix) else np.asarray(matrix)

    def C(self, t: float) -> np.ndarray:
        total = np.zeros(self.dimension, dtype=complex)
        for weight, piece in zip(self.coefficients(t), self.pieces):
            if weight != 0:
                total += weight * piece.vector
        return total

    def apply(self, t: float, y: np.ndarray) -> np.ndarray:
        """A(t) @ y without forming A(t)"""
        result = np.zeros(np.shape(y), dtype=complex)
        for weight, piece in zip(self.coefficients(t), self.pieces):
            if weight != 0:
                result += weight * (piece.matrix @ y)
        return result

    def solve(self, t: float, rhs: np.ndarray) -> np.ndarray:
        """
        Solve A(t) x = rhs

        Raises:
            SingularGeneratorError: A(t) singular
        """
        return solve_operator(self.operator(t), rhs, f"A(t={t:.6g})")

    def frozen(self, t: float) -> "PeriodicGenerator":
        """Static generator with all parameters frozen at time t"""
        piece = GeneratorPiece(matrix=self.operator(t), vector=self.C(t), label="frozen")
        return PeriodicGenerator(
            period=self.period,
            basis=self.basis,
            markers=self.markers,
            pieces=(piece,),
            static=True,
            label=f"{self.label}@{t:.6g}",
        )

    def averaged(self, times: np.ndarray) -> Tuple[Operator, np.ndarray]:
        """
        Period averages (A_bar, C_bar) by uniform quadrature

        Args:
            times: Uniform grid covering [0, T) without the endpoint
        """
        matrix = None
        vector = np.zeros(self.dimension, dtype=complex)
        for piece in self.pieces:
            mean = np.mean([piece.value(t) for t in times])
            term = mean * piece.matrix
            matrix = term if matrix is None else matrix + term
            vector += mean * piece.vector
        return matrix, vector


def solve_operator(matrix: Operator, rhs: np.ndarray, context: str = "A") -> np.ndarray:
    """Dense or sparse linear solve with a domain error on singularity"""
    try:
        if sp.issparse(matrix):
            solution = spla.spsolve(sp.csc_matrix(matrix), rhs)
        else:
            solution = np.linalg.solve(matrix, rhs)
    except (np.linalg.LinAlgError, RuntimeError) as e:
        raise SingularGeneratorError("liouvillian", f"{context} is singular: {e}") from e
    if not np.all(np.isfinite(solution)):
        raise SingularGeneratorError("liouvillian", f"{context} is singular")
    return np.asarray(solution)


@dataclass(frozen=True)
class DensityVector:
    """Reduced state vector together with its basis"""
    values: np.ndarray
    basis: BasisDescriptor

    def __post_init__(self):
        if np.shape(self.values) != (self.basis.size,):
            raise ValueError(
                f"DensityVector needs {self.basis.size} components, got {np.shape(self.values)}"
            )


@dataclass(frozen=True)
class DensityDiagnostics:
    trace_error: float
    hermiticity_error: float
    min_eigenvalue: float


def _superoperators(operator: Operator, dimension: int) -> sp.csr_matrix:
    """-i(I x H - H^T x I) for column stacking"""
    identity = sp.identity(dimension, dtype=complex, format="csr")
    h = sp.csr_matrix(operator, dtype=complex)
    return -1j * (sp.kron(identity, h, format="csr") - sp.kron(h.T, identity, format="csr"))


def _dissipator(jump: Operator, dimension: int) -> sp.csr_matrix:
    """O rho O^+ - {O^+ O, rho}/2 for column stacking"""
    identity = sp.identity(dimension, dtype=complex, format="csr")
    o = sp.csr_matrix(jump, dtype=complex)
    number = (o.conj().T @ o).tocsr()
    return (
        sp.kron(o.conj(), o, format="csr")
        - 0.5 * sp.kron(identity, number, format="csr")
        - 0.5 * sp.kron(number.T, identity, format="csr")
    ).tocsr()


def _reduce(full: sp.csr_matrix, basis: BasisDescriptor) -> Tuple[Operator, np.ndarray]:
    """
    Eliminate rho_00 = 1 - sum_i rho_ii from a full stacked superoperator
    """
    p = basis.stacked_indices
    markers = basis.diagonal_markers
    scales = basis.scale_array

    block = full[p, :][:, p]
    source = np.asarray(full[p, :][:, [0]].toarray()).ravel()
    # A = L_pp - L_p0 E^T, C = L_p0
    unscaled = block - sp.csr_matrix(source[:, None]) @ sp.csr_matrix(markers[None, :])

    scaling = sp.diags(scales)
    matrix = (scaling @ unscaled @ sp.diags(1.0 / scales)).tocsr()
    vector = scales * source

    if basis.size <= DENSE_LIMIT:
        return matrix.toarray(), vector
    return matrix, vector


def _sample_times(period: float, static: bool) -> np.ndarray:
    if static:
        return np.array([0.0])
    return np.linspace(0.0, period, 16, endpoint=False)


def build_generator(spec: LindbladSpec, label: str = "") -> PeriodicGenerator:
    """
    Reduced generator of a Lindblad specification

    Args:
        spec: Hamiltonian terms, jump operator, rate and basis
        label: Name used in log messages

    Returns:
        PeriodicGenerator with one piece per Hamiltonian term plus the dissipator

    Raises:
        ValueError: non-Hermitian H_eff or negative rate at a sampled time
    """
    n = spec.dimension
    if spec.basis.dimension != n:
        raise ValueError("Basis dimension does not match the Lindblad specification")
    if spec.period <= 0:
        raise ValueError(f"Period must be positive, got {spec.period}")

    for t in _sample_times(spec.period, spec.static):
        hamiltonian = spec.hamiltonian(t)
        error = float(np.max(np.abs(hamiltonian - hamiltonian.conj().T)))
        if error > 1e-12 * max(1.0, float(np.max(np.abs(hamiltonian)))):
            raise ValueError(f"H_eff(t={t:.6g}) is not Hermitian (deviation {error:.3e})")
        rate = spec.rate(t)
        if rate < 0:
            raise ValueError(f"Dissipation rate gamma(t={t:.6g}) = {rate} is negative")

    pieces = []
    for term in spec.hamiltonian_terms:
        matrix, vector = _reduce(_superoperators(term.operator, n), spec.basis)
        pieces.append(GeneratorPiece(matrix, vector, term.coefficient, term.label or "hamiltonian"))

    matrix, vector = _reduce(_dissipator(spec.jump, n), spec.basis)
    pieces.append(GeneratorPiece(matrix, vector, spec.rate, "dissipator"))

    generator = PeriodicGenerator(
        period=spec.period,
        basis=spec.basis,
        markers=spec.basis.diagonal_markers,
        pieces=tuple(pieces),
        static=spec.static,
        label=label,
    )
    logger.debug(f"Generator built: {label or 'unnamed'} (D={generator.dimension}, pieces={len(pieces)})")
    return generator


def devectorize(vector: Union[DensityVector, np.ndarray], basis: Optional[BasisDescriptor] = None,
                trace: complex = 1.0) -> np.ndarray:
    """
    Reconstruct the N x N matrix from reduced components

    Args:
        vector: DensityVector, or raw components (D,) / (K, D) with basis given
        basis: Basis for raw components
        trace: Trace of the reconstructed operator (1 for density matrices)

    Returns:
        Matrix (N, N) or stack (K, N, N)
    """
    if isinstance(vector, DensityVector):
        basis = vector.basis
        values = vector.values
    else:
        if basis is None:
            raise ValueError("basis is required for raw component arrays")
        values = np.asarray(vector)

    single = values.ndim == 1
    values = np.atleast_2d(values)
    n = basis.dimension
    rho = np.zeros((values.shape[0], n, n), dtype=complex)
    rho[:, basis.rows, basis.cols] = values / basis.scale_array
    rho[:, 0, 0] = trace - np.einsum("kii->k", rho)
    return rho[0] if single else rho


def vectorize_operator(operator: np.ndarray, basis: BasisDescriptor) -> Tuple[np.ndarray, complex]:
    """
    Reduced components and trace of an arbitrary operator (or stack of them)
    """
    operator = np.asarray(operator, dtype=complex)
    components = operator[..., basis.rows, basis.cols] * basis.scale_array
    trace = np.trace(operator, axis1=-2, axis2=-1)
    return components, trace


def vectorize(rho: np.ndarray, basis: BasisDescriptor) -> DensityVector:
    """Inverse of devectorize for a unit-trace density matrix"""
    components, _ = vectorize_operator(rho, basis)
    return DensityVector(values=components, basis=basis)


def density_diagnostics(rho: np.ndarray) -> DensityDiagnostics:
    """Trace error, Hermiticity error and smallest eigenvalue of rho"""
    rho = np.asarray(rho)
    hermitian = 0.5 * (rho + rho.conj().T)
    return DensityDiagnostics(
        trace_error=float(abs(np.trace(rho) - 1.0)),
        hermiticity_error=float(np.max(np.abs(rho - rho.conj().T))),
        min_eigenvalue=float(np.min(np.linalg.eigvalsh(hermitian))),
    )


def dissipation_gap(a_static: Operator, n_eigs: int = 8) -> float:
    """
    Smallest decay rate gamma_min = min_j(-Re lambda_j) of a static generator

    Large sparse generators combine shift-invert Arnoldi around zero with a
    rightmost-real-part pass, so slow modes far off the real axis are kept.
    """
    if sp.issparse(a_static) and a_static.shape[0] > DENSE_LIMIT:
        matrix = sp.csc_matrix(a_static)
        k = min(n_eigs, matrix.shape[0] - 2)
        nearest = spla.eigs(matrix, k=k, sigma=0.0, which="LM", return_eigenvectors=False)
        try:
            rightmost = spla.eigs(matrix, k=k, which="LR", return_eigenvectors=False)
        except spla.ArpackNoConvergence as e:
            logger.debug(f"Rightmost-eigenvalue pass kept {len(e.eigenvalues)} converged values")
            rightmost = e.eigenvalues
        values = np.concatenate([nearest, rightmost])
    else:
        dense = a_static.toarray() if sp.issparse(a_static) else np.asarray(a_static)
        values = np.linalg.eigvals(dense)
    gap = float(np.min(-np.real(values)))
    return max(gap, 0.0) if gap > -HERMITICITY_TOL else gap
