"""Exception hierarchy shared across the package."""


class GwireError(Exception):
    """Base class for all package errors."""


class InvalidInputError(GwireError, ValueError):
    """Input values violate a precondition (non-finite entries, negative distance, ...)."""


class ShapeError(GwireError, ValueError):
    """Array dimensions are incompatible."""


class InsufficientDataError(GwireError, ValueError):
    """Too few observations for the requested estimate."""


class SingularMatrixError(GwireError, ValueError):
    """Matrix is numerically singular where positive definiteness is required."""


class IncompatibleResponseError(GwireError, ValueError):
    """Two response objects are of different variants and cannot be compared."""


class InvalidSlicingError(GwireError, ValueError):
    """Slicing scheme cannot be formed from the data."""


class ConfigurationError(GwireError, ValueError):
    """Unknown option value or out-of-range configuration parameter."""


class NumericalFailureError(GwireError, RuntimeError):
    """Non-finite values appeared during iteration."""


class DegenerateFitError(GwireError, RuntimeError):
    """A fit produced an empty or rank-deficient result where a usable one is required."""


class DegenerateDirectionsError(GwireError, ValueError):
    """Direction matrix is rank deficient or cannot be standardized."""


class RequiresSolverStateError(GwireError, ValueError):
    """Operation needs the decomposition blocks produced by the solver."""
