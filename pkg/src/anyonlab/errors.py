"""Exception types raised across the package."""


class AnyonLabError(Exception):
    """Base class for all package errors."""


class ShapeError(AnyonLabError, ValueError):
    """Arity, dimension or group mismatch."""


class DomainError(AnyonLabError, ValueError):
    """Argument outside the domain where an operation is defined."""


class ResourceError(AnyonLabError, MemoryError):
    """Hilbert-space dimension above the configured cap."""


class ConnectivityError(AnyonLabError, ValueError):
    """Consecutive ribbon sites are not adjacent."""


class GeometryError(AnyonLabError, ValueError):
    """A region or loop does not have the required geometry."""


class DivergenceError(DomainError):
    """A lattice sum does not converge."""


class ResolutionError(AnyonLabError, ValueError):
    """Sampling grid too coarse to certify a bound."""

    def __init__(self, message, required=None):
        super().__init__(message)
        self.required = required


class NumericError(AnyonLabError, ArithmeticError):
    """A numerical decomposition failed."""


class ModelConsistencyError(AnyonLabError, RuntimeError):
    """A lattice computation contradicts the model's defining identities."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


class AssumptionViolationError(AnyonLabError, RuntimeError):
    """A gap or band assumption fails along a perturbation path."""

    def __init__(self, message, payload=None):
        super().__init__(message)
        self.payload = payload or {}


class MeasurementAmbiguityError(AnyonLabError, RuntimeError):
    """State is not an eigenvector of the local charge/flux operators."""

    def __init__(self, message, weights=None):
        super().__init__(message)
        self.weights = weights


class SchemaError(AnyonLabError, ValueError):
    """An experiment config does not match its schema; ``path`` names the field."""

    def __init__(self, path: str, message: str):
        super().__init__(f"{path}: {message}")
        self.path = path
