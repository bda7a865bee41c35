"""
Solver error kinds
Every message carries the module context that raised it
"""

from typing import Optional


class FloquetError(Exception):
    """
    Base class for solver failures (CLI exit code 2)
    """

    def __init__(self, module: str, message: str):
        self.module = module
        super().__init__(f"{module}: {message}")


class IntegrationError(FloquetError):
    """ODE integrator gave up (step-size underflow or internal failure)"""


class DivergenceError(FloquetError):
    """Non-finite state produced during integration"""


class DefectiveMatrixError(FloquetError):
    """Eigenvector matrix too ill-conditioned to trust a diagonalization"""

    def __init__(self, module: str, message: str, condition: float):
        self.condition = condition
        super().__init__(module, f"{message} (condition estimate {condition:.3e})")


class NonDissipativeError(FloquetError):
    """A mode that does not decay over one period"""

    def __init__(self, module: str, message: str, modulus: Optional[float] = None):
        self.modulus = modulus
        super().__init__(module, message)


class SingularGeneratorError(FloquetError):
    """Generator (or its average) cannot be inverted"""


class TruncationError(FloquetError):
    """Fock-space truncation not converged or state lost positivity"""
