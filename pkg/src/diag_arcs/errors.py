"""Shared exception types.

Exit-code mapping used by the CLI: InputError -> 1, BudgetError -> 2.
"""


class DiagArcsError(Exception):
    """Base class for all package errors."""


class InputError(DiagArcsError):
    """Malformed or inconsistent user input (bad system file, bad flag)."""


class ValidationError(InputError):
    """A candidate diagonal system violates a structural invariant."""


class BudgetError(DiagArcsError):
    """An enumeration / memory / evaluation budget would be exceeded."""


class OverflowLimitError(DiagArcsError):
    """A checked wide-integer operation left the 128-bit signed range."""


class PreconditionError(DiagArcsError):
    """A documented operation precondition does not hold for the inputs."""


class QuadratureError(DiagArcsError):
    """Adaptive quadrature failed to converge within its evaluation budget.

    Carries the best estimate so callers can decide whether to use it.
    """

    def __init__(self, message, best_value=None, error_estimate=None):
        super().__init__(message)
        self.best_value = best_value
        self.error_estimate = error_estimate
