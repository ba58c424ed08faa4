"""
Typed errors raised by the solver library
"""

from typing import Any, Dict, List, Optional


class QDotError(Exception):
    """Base class for every error raised by the package"""


class ArgumentError(QDotError, ValueError):
    """Invalid argument: bad mesh sizes, mismatched field lengths, wrong class shape"""


class ConfigError(QDotError):
    """Problem configuration could not be read or validated"""


class SolverError(QDotError, RuntimeError):
    """An eigen or root solve failed to converge"""

    def __init__(
        self,
        message: str,
        last_residual: Optional[float] = None,
        context: Optional[Dict[str, Any]] = None,
    ):
        super().__init__(message)
        self.last_residual = last_residual
        self.context = dict(context or {})

    def with_context(self, **context: Any) -> "SolverError":
        self.context.update(context)
        return self


class ConditionsViolatedError(SolverError):
    """g(λ) has no sign change on the admissible interval"""


class CertificateError(QDotError):
    """A fixed-point certificate did not reproduce the reported fields"""

    def __init__(self, message: str, p_cells: Optional[List[int]] = None, q_cells: Optional[List[int]] = None):
        super().__init__(message)
        self.p_cells = list(p_cells or [])
        self.q_cells = list(q_cells or [])
