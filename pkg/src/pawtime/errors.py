"""Exception types raised across the package."""


class PawtimeError(Exception):
    """Base class for all package errors."""


class InvalidArgument(PawtimeError, ValueError):
    """An argument violates a documented precondition."""


class DimensionMismatch(PawtimeError, ValueError):
    """Two objects live on incompatible spaces or grids."""


class NeverOccurs(PawtimeError):
    """The event has (numerically) zero probability over the whole window.

    Any conditional distribution is then undefined: numerator and
    denominator of the Bayes quotient both vanish.
    """

    def __init__(self, message, total_mass=0.0):
        super().__init__(message)
        self.total_mass = total_mass


class PropagationError(PawtimeError):
    """Norm drift during time stepping exceeded the allowed bound."""

    def __init__(self, message, tick=None):
        super().__init__(message)
        self.tick = tick


class NoFlux(PawtimeError):
    """The probability current at the detector is nowhere positive."""


class SizeGuardError(PawtimeError):
    """An explicit tensor construction would exceed its size limit."""


class ValidationError(PawtimeError):
    """A scenario configuration failed validation."""
