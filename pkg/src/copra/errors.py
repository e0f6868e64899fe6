"""Exception hierarchy.

Input problems derive from :class:`InputError` (CLI exit code 1), numerical
breakdowns from :class:`NumericalError` (CLI exit code 2).
"""


class CopraError(Exception):
    """Base class for every error raised by this package."""


class InputError(CopraError, ValueError):
    pass


class NumericalError(CopraError, ArithmeticError):
    pass


class InvalidInputError(InputError):
    pass


class DomainError(InputError):
    pass


class ConfigError(InputError):
    pass


class DegenerateObservationError(InputError):
    """The observation has no energy in the retained modes."""


class DegenerateModelError(NumericalError):
    """Every singular value of the model matrix fell below the rank tolerance."""


class SingularityError(NumericalError):
    pass


class NonConvergenceError(NumericalError):
    """Newton iteration exhausted ``max_iter``.

    ``last_iterate`` holds the final normalized regularizer so callers can
    still use it.
    """

    def __init__(self, message, last_iterate, iterations):
        super().__init__(message)
        self.last_iterate = last_iterate
        self.iterations = iterations
