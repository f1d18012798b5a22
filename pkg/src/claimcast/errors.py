"""Exception hierarchy shared across the package.

The CLI maps these onto exit codes: input/contract problems exit with 2,
numerical failures with 3.
"""


class ClaimcastError(Exception):
    """Base class for all package errors."""


class DomainError(ClaimcastError, ValueError):
    """An argument violates a documented precondition."""


class ValidationError(ClaimcastError, ValueError):
    """A fitted or loaded object fails its invariants."""


class LoadError(ClaimcastError):
    """Input data could not be ingested.

    Carries the per-row issues that triggered the failure, if any.
    """

    def __init__(self, message, issues=None):
        super().__init__(message)
        self.issues = list(issues) if issues else []


class FitError(ClaimcastError, RuntimeError):
    """An optimizer failed to converge.

    Attributes
    ----------
    best_params : tuple or None
        Best iterate reached before giving up.
    residual_norm : float or None
        Objective value at the best iterate.
    """

    def __init__(self, message, best_params=None, residual_norm=None):
        super().__init__(message)
        self.best_params = best_params
        self.residual_norm = residual_norm


class NumericalError(ClaimcastError, RuntimeError):
    """A quadrature or root-finding routine failed to reach tolerance."""
