"""Exact solution counting for Vinogradov-type systems, discrete decoupling checks,
and desk-scale probes of the curve extension operator."""

from .counting import PhiMap, count_solutions, diagonal_count, weighted_moment
from .curves import Curve
from .errors import (
    AccuracyWarning,
    BudgetExceeded,
    ConfigurationError,
    ContractViolation,
    ConvergenceError,
    CountdecError,
    DomainError,
    InvariantViolation,
)

__version__ = "0.1.0"

__all__ = [
    "AccuracyWarning",
    "BudgetExceeded",
    "ConfigurationError",
    "ContractViolation",
    "ConvergenceError",
    "CountdecError",
    "Curve",
    "DomainError",
    "InvariantViolation",
    "PhiMap",
    "count_solutions",
    "diagonal_count",
    "weighted_moment",
]
