"""BS-side and MPC-level visibility regions for COST 2100-style massive MIMO channels.

Modules
-------
bsvr_process
    Poisson birth-death process of BS-side visibility regions on an array.
inference
    Censored likelihood, closed-form and numerical MLE, moments estimator, CRLB.
correlation
    Autocorrelation of visible-cluster and visible-MPC counts.
mpc_model
    MPC lifetime fits, chord-length CDFs, the radius QP and the gain function.
channel
    Simplified channel synthesizer and condition-number statistics.
experiments, cli
    Figure experiments and the command-line interface.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    ConvergenceError,
    CostVrError,
    DegenerateDistributionError,
    InsufficientDataError,
    InvalidParameterError,
    InvalidScenarioError,
    SingularMatrixError,
    UndefinedEstimateError,
    UnsupportedDistributionError,
)
from .lifetimes import Exponential, LognormalDb, TruncatedLognormalDb  # noqa: E402

__all__ = [
    "ConvergenceError",
    "CostVrError",
    "DegenerateDistributionError",
    "Exponential",
    "InsufficientDataError",
    "InvalidParameterError",
    "InvalidScenarioError",
    "LognormalDb",
    "SingularMatrixError",
    "TruncatedLognormalDb",
    "UndefinedEstimateError",
    "UnsupportedDistributionError",
]
