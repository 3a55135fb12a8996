"""Exception hierarchy shared by all ergolib modules."""


class ErgolibError(Exception):
    """Base class for every error raised by ergolib."""


class InputError(ErgolibError, ValueError):
    """Malformed operator or vector input (non-square, NaN/Inf, bad JSON shape)."""


class DimensionMismatchError(InputError):
    pass


class EigensolverError(ErgolibError):
    """The dense eigensolver failed to converge."""

    def __init__(self, message, label=None):
        super().__init__(message)
        self.label = label


class IllConditionedDecompositionError(ErgolibError):
    """Spectral decomposition residuals exceed the configured tolerance."""

    def __init__(self, message, residuals):
        super().__init__(message)
        self.residuals = residuals


class ContourPlacementError(ErgolibError):
    """A contour node lies on (or numerically at) the spectrum."""


class SingularShiftError(ErgolibError):
    """A + P is numerically singular, so P is not the kernel/range projection."""


class UnboundedTrajectoryError(ErgolibError):
    """A bounded-trajectory precondition was violated.

    ``witness`` carries the classification that shows why.
    """

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class TrajectoryOverflowWarning(RuntimeWarning):
    """A trajectory magnitude exceeded 1e300 and was reported as infinite."""
