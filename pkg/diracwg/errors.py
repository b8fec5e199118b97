"""Exception hierarchy shared by every diracwg module."""
from typing import Any, Dict, Optional


class DiracWGError(Exception):
    """Base class for all errors raised by diracwg."""


class ArgumentError(DiracWGError, ValueError):
    """Invalid arguments or violated preconditions."""


class BranchDomainError(ArgumentError):
    """A dispersion branch was requested outside the mass range where it exists."""


class GeometryValidationError(ArgumentError):
    def __init__(self, report: Any):
        self.report = report
        super().__init__("geometry failed validation: " + "; ".join(report.failures))


class NotHermitianError(ArgumentError):
    """Matrix asymmetry exceeds the configured tolerance."""


class NumericsError(DiracWGError, ArithmeticError):
    """A numerical kernel could not produce a trustworthy result."""


class BracketError(NumericsError):
    def __init__(self, message: str, diagnostics: Optional[Dict[str, float]] = None):
        self.diagnostics = diagnostics or {}
        details = ", ".join(f"{key}={value:.17g}" for key, value in self.diagnostics.items())
        super().__init__(f"{message} ({details})" if details else message)


class EvaluationError(NumericsError):
    """The function handed to a root finder returned a non-finite value."""


class AssemblyError(NumericsError):
    """The Galerkin assembly produced an inconsistent matrix."""


class ConvergenceError(NumericsError):
    """A refinement changed the answer by more than the tolerance."""


class TruncationError(ConvergenceError):
    pass


class ResolutionError(ConvergenceError):
    pass


def exit_code_for(exc: BaseException) -> int:
    """Exit code used by the command line for an exception."""
    if isinstance(exc, ArgumentError):
        return 2
    if isinstance(exc, NumericsError):
        return 3
    return 1
