"""Exception types shared across the package."""


class TorusOscError(Exception):
    """Base class for all errors raised by torusosc."""


class InvalidInputError(TorusOscError, ValueError):
    pass


class ChartTooLargeError(TorusOscError, ValueError):
    """Requested chart radius exceeds 1/4."""


class NonDifferentiablePointError(TorusOscError, ValueError):
    pass


class BudgetExceededError(TorusOscError, ValueError):
    pass


class UnsupportedOperationError(TorusOscError, ValueError):
    pass


class DivergentIntegralError(TorusOscError, ValueError):
    pass


class ConfigError(TorusOscError, ValueError):
    """Experiment configuration failed validation."""
