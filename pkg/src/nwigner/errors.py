"""Exception hierarchy.

Errors fall into two families that the command line maps to distinct exit
codes: :class:`NumericError` (the computation could not be carried out at the
requested accuracy) and :class:`PreconditionError` (the inputs do not have the
structure an operation requires).
"""


class WignerError(Exception):
    """Base class for every error raised by this package."""


class NumericError(WignerError):
    pass


class PreconditionError(WignerError, ValueError):
    pass


class ConfigError(WignerError):
    pass


class NotSquare(PreconditionError):
    pass


class NotHermitian(PreconditionError):
    pass


class InvalidState(PreconditionError):
    pass


class InvalidSpin(PreconditionError):
    pass


class ZeroVector(PreconditionError):
    pass


class DimensionMismatch(PreconditionError):
    pass


class ZeroDirection(PreconditionError):
    pass


class BadAxis(PreconditionError):
    pass


class BadDimension(PreconditionError):
    pass


class NotCommuting(PreconditionError):
    pass


class NotOrthonormal(PreconditionError):
    pass


class OrderTooHigh(PreconditionError):
    pass


class InvalidAction(PreconditionError):
    pass


class NotReducing(PreconditionError):
    pass


class TrivialB(PreconditionError):
    pass


class ConvergenceFailure(NumericError):
    pass


class LatticeTooLarge(NumericError):
    pass


class ResolutionTooLow(NumericError):
    """The frequency lattice does not reach far enough to damp the Gaussian.

    ``min_counts`` holds the smallest compliant per-axis counts, when known.
    """

    def __init__(self, message, min_counts=None):
        super().__init__(message)
        self.min_counts = min_counts


class BoxTooSmall(PreconditionError):
    """The grid box does not cover the joint numerical range plus its Gaussian margin."""
