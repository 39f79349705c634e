"""Exception types shared across the library."""


class TangentcutError(Exception):
    """Base class for every error raised by this package."""


class DuplicatePoints(TangentcutError):
    """Two points in a cloud coincide exactly."""


class InvalidK(TangentcutError):
    """Neighborhood size is out of range for the cloud."""


class NotOrthonormal(TangentcutError):
    """A matrix expected to have orthonormal columns does not."""


class DegenerateNeighborhood(TangentcutError):
    """A local structure matrix has numerical rank below the requested dimension."""


class IsolatedVertex(TangentcutError):
    """A similarity graph vertex has zero total edge weight."""


class EmptyClusterDenominator(TangentcutError):
    """A cluster has zero intra-cluster similarity mass."""


class ConvergenceFailure(TangentcutError):
    """An iterative numerical routine failed to reach its tolerance."""


class InsufficientInliers(TangentcutError):
    """Outlier filtering left too few points to cluster."""


class InvalidGeometry(TangentcutError):
    """Generator parameters describe an impossible configuration."""


class LengthMismatch(TangentcutError):
    """Two label vectors have different lengths."""


class ConfigError(TangentcutError):
    """A run configuration is malformed or inconsistent."""
