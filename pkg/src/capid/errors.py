"""Exception types shared across the package.

The CLI maps these onto process exit codes: domain/config problems exit 2,
invalid capacities exit 3, numerical estimation failures exit 4.
"""


class CapidError(Exception):
    """Base class for all package errors."""


class DomainError(CapidError, ValueError):
    """An input value is outside its documented domain."""


class DimensionError(CapidError, ValueError):
    """Array shapes or criteria counts do not agree."""


class InvalidCapacityError(CapidError, ValueError):
    """A capacity vector violates boundedness or monotonicity."""


class InfeasibleError(CapidError, ValueError):
    """A constraint set admits no solution from the given state."""


class EstimationError(CapidError, RuntimeError):
    """A statistical estimate is undefined for the given sample."""
