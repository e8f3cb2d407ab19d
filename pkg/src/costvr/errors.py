"""Exception hierarchy shared by all costvr modules."""


class CostVrError(Exception):
    """Base class; carries a short machine-readable ``code``."""

    code = "error"


class InvalidParameterError(CostVrError, ValueError):
    code = "invalid-parameter"


class UnsupportedDistributionError(CostVrError):
    code = "unsupported-distribution"


class DegenerateDistributionError(CostVrError):
    code = "degenerate-distribution"


class InsufficientDataError(CostVrError):
    code = "insufficient-data"


class UndefinedEstimateError(CostVrError):
    code = "undefined-estimate"


class SingularMatrixError(CostVrError):
    code = "singular-fim"


class ConvergenceError(CostVrError):
    """Raised when an iterative solver gives up.

    The best iterate found so far is attached so callers can still use it.
    """

    code = "convergence-failure"

    def __init__(self, message, best=None, residual=None):
        super().__init__(message)
        self.best = best
        self.residual = residual


class InvalidScenarioError(CostVrError, ValueError):
    code = "invalid-scenario"
