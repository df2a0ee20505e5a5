"""Exception types raised across the package."""


class EigengapError(Exception):
    """Base class for errors raised by this package."""


class InvalidSpecError(EigengapError, ValueError):
    """A source, noise, band or method specification is malformed."""


class InsufficientDataError(EigengapError, ValueError):
    """A recording is too short for the requested processing."""


class EmptyBandError(EigengapError, ValueError):
    """No frequency bins remain after band selection or standardization."""


class AlignmentError(EigengapError, ValueError):
    """A weight vector does not line up with the bins it is applied to."""


class EmptyInputError(EigengapError, ValueError):
    """An aggregate was requested over an empty collection."""


class EvaluationError(EigengapError, RuntimeError):
    """A batch evaluation could not produce any result."""
