"""Sudden-quench dynamics, survival probabilities and quantum speed limits
for trapped free fermions and a spin impurity in an LMG bath."""

from .config import DEFAULT_TOLERANCES, Tolerances
from .errors import (
    ConvergenceError,
    InvalidOverlapError,
    QuenchError,
    TruncationError,
    UndefinedBoundError,
    UnreachableThresholdError,
)
from .series import SurvivalSeries, uniform_grid

__version__ = "0.1.0"

__all__ = [
    "DEFAULT_TOLERANCES",
    "Tolerances",
    "SurvivalSeries",
    "uniform_grid",
    "QuenchError",
    "TruncationError",
    "ConvergenceError",
    "InvalidOverlapError",
    "UndefinedBoundError",
    "UnreachableThresholdError",
    "__version__",
]
