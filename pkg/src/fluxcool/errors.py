"""Exception hierarchy.

Input problems (bad arguments, bad config) derive from :class:`InputError`;
numerical failures during a computation derive from :class:`ComputeError`.
The CLI maps the two families onto exit codes 1 and 2.
"""


class FluxCoolError(Exception):
    """Base class for all package errors."""

    category = "error"


class InputError(FluxCoolError, ValueError):
    category = "input"


class ComputeError(FluxCoolError, ArithmeticError):
    category = "compute"


class DomainError(InputError):
    """Argument outside the domain of an operation."""

    category = "domain"


class ValidityError(InputError):
    """An approximation is used outside its regime of validity."""

    category = "validity"


class NotReachedError(InputError):
    """The drive excursion never reaches the requested crossover."""

    category = "not-reached"


class SingularInputError(InputError):
    category = "singular-input"


class ConfigError(InputError):
    category = "config"


class DegenerateChainError(ComputeError):
    """The rate generator has no unique stationary distribution."""

    category = "degenerate-chain"

    def __init__(self, message, classes=()):
        super().__init__(message)
        self.classes = [tuple(c) for c in classes]


class SweepFailedError(ComputeError):
    category = "sweep-failed"
