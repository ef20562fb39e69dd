"""Exception types shared across the solver."""


class Q2SatError(Exception):
    """Base class for solver errors."""


class InvalidInputError(Q2SatError, ValueError):
    """Malformed or out-of-range input data."""


class ParseError(InvalidInputError):
    """An instance file could not be parsed.

    ``context`` names the offending field or line so the message is actionable.
    """

    def __init__(self, message, context=None):
        self.context = context
        if context is not None:
            message = f"{context}: {message}"
        super().__init__(message)


class PreconditionError(Q2SatError):
    """An operation was called on data that violates its precondition."""


class ResourceLimitError(Q2SatError):
    """A configured size cap was exceeded.

    When the cap is on the ground-space dimension, the exact dimension is
    carried in ``dimension``.
    """

    def __init__(self, message, dimension=None):
        self.dimension = dimension
        super().__init__(message)
