"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Structurally invalid input: bad weights, malformed files, bad flags."""


class PreconditionError(ValidationError):
    """An operation was called outside its declared preconditions."""


class EvaluationError(RuntimeError):
    """A cost function produced a non-finite value where one was required.

    Carries the offending point in ``point`` when known.
    """

    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


class DivergenceError(RuntimeError):
    """A computation hit the divergence sentinel where a finite value was
    required (CLI exit code 2)."""
