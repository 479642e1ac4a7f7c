"""Exception hierarchy. Every error carries a short machine-readable ``category``."""


class OrdexpError(Exception):
    category = "error"


class ValidationError(OrdexpError, ValueError):
    category = "validation"


class DegenerateDataError(ValidationError):
    category = "degenerate"


class DomainError(OrdexpError, ValueError):
    category = "domain"


class NumericError(OrdexpError, ArithmeticError):
    """Numerical procedure failed. ``estimate`` and ``error`` hold the best result so far."""

    category = "numeric"

    def __init__(self, message, estimate=None, error=None):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class BracketError(NumericError):
    category = "bracket"


class ConvergenceError(NumericError):
    category = "convergence"


class IOFailure(OrdexpError, OSError):
    category = "io"
