"""Numerical laboratory for oscillation of Lipschitz functions on coordinate subtori of the flat torus."""

from .errors import (
    BudgetExceededError,
    ChartTooLargeError,
    ConfigError,
    DivergentIntegralError,
    InvalidInputError,
    NonDifferentiablePointError,
    TorusOscError,
    UnsupportedOperationError,
)

__version__ = "0.1.0"

__all__ = [
    "BudgetExceededError",
    "ChartTooLargeError",
    "ConfigError",
    "DivergentIntegralError",
    "InvalidInputError",
    "NonDifferentiablePointError",
    "TorusOscError",
    "UnsupportedOperationError",
]
