"""Exception types shared across the package."""


class ValidationError(ValueError):
    """Input data or parameters violate a documented precondition."""


class DegenerateVelocityError(ValidationError):
    """A velocity norm is too small to normalize by."""


class EmptySampleError(RuntimeError):
    """A set-valued map returned no candidate velocity.

    Raised by the Euler scheme when the (possibly filtered) velocity
    sample is empty, which signals that a regulation map is infeasible
    at the current state.
    """

    def __init__(self, message, t=None, x=None, step=None):
        super().__init__(message)
        self.t = t
        self.x = x
        self.step = step


class CsvFormatError(ValidationError):
    """A CSV input could not be parsed; carries the offending line number."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line
