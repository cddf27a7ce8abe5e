"""Exception types raised by the library."""


class DomainError(ValueError):
    """A frequency or parameter lies outside the model's domain."""


class RangeError(ValueError):
    """A distortion (or ratio) value lies outside the admissible range."""


class ValidityError(ValueError):
    """A closed form was requested outside the region where it holds."""


class NonIntegrableError(ValueError):
    """A spectral integral diverges or cannot be evaluated."""


class UnsupportedError(NotImplementedError):
    """The requested quantity has no constructive recipe in this library."""


class ConvergenceError(RuntimeError):
    """An iterative routine stopped before meeting its tolerance."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual
