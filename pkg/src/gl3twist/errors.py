"""Shared exception types.

Every raise in the package goes through one of these so callers (and the CLI
exit-code mapping) can tell bad inputs apart from blown budgets and from
numerical breakdowns.
"""


class DomainError(ValueError):
    """Input outside an operation's mathematical domain (non-coprime, composite, ...)."""


class ResourceBudgetError(RuntimeError):
    """An enumeration / node / tail budget was exhausted before the target was met."""

    def __init__(self, message, best_estimate=None):
        super().__init__(message)
        self.best_estimate = best_estimate


class NumericalError(RuntimeError):
    """Ill-conditioning or loss of precision detected mid-computation."""


class CalibrationError(RuntimeError):
    """A fitted model (asymptotic coefficients, envelopes) failed its residual check."""


class PreconditionError(RuntimeError):
    """A stated analytic precondition (sign-definite derivative, regime) does not hold."""
