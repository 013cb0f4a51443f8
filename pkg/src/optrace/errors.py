"""Exception types raised by the optrace engine."""


class OptraceError(Exception):
    """Base class for all engine errors."""


class DomainError(OptraceError, ValueError):
    """An argument lies outside the domain of an operation."""


class ConfigurationError(OptraceError, ValueError):
    """Inconsistent shapes, truncation settings or run configuration."""


class ClusteringError(OptraceError):
    """Eigenvalues could not be assigned to unperturbed levels."""


class TruncationRangeError(OptraceError, IndexError):
    """A level index beyond the trusted part of the truncation was requested."""


class PoleProximityError(OptraceError):
    """A spectral parameter or contour passes too close to a pole."""


class SymmetryViolationError(OptraceError):
    """A quantity that must be real came out with a significant imaginary part."""
