"""
Exception types raised by the governor toolkit.
"""

from typing import Optional


class ConfigurationError(ValueError):
    """Invalid dimensions, parameters, models or configuration documents."""


class NumericalFailureError(RuntimeError):
    """A numerical routine could not produce a trustworthy result."""


class NonTerminationError(NumericalFailureError):
    """An iterative set construction hit its iteration cap."""

    def __init__(self, message: str, last_margin: Optional[float] = None,
                 iterations: Optional[int] = None):
        super().__init__(message)
        self.last_margin = last_margin
        self.iterations = iterations


class InfeasibleRobustificationError(ValueError):
    """Disturbance tightening emptied the output constraint set."""


class GovernorInitializationError(ValueError):
    """The governor cannot start from the given state."""


class InputValidationError(ValueError):
    """An online input (reference or disturbance preview) is malformed."""


class AssertionFailedError(RuntimeError):
    """A check requested on the command line did not hold."""
