"""Exception hierarchy shared by all ridgeopt modules."""


class RidgeOptError(Exception):
    """Base class for numerical failures raised by ridgeopt."""


class DegenerateSampleError(RidgeOptError, ValueError):
    """Sample too small for the requested operation."""


class SingularityError(RidgeOptError):
    """Design matrix is numerically rank deficient."""


class NonConvexObjectiveError(RidgeOptError, ValueError):
    """Penalty at or below -sigma_min**2, where the ridge objective is not strictly convex."""


class DegenerateParameterError(RidgeOptError):
    """Parameter vector has no component in the span of the right singular vectors."""


class DimensionMismatchError(RidgeOptError, ValueError):
    pass


class EstimationError(RidgeOptError):
    """Noise estimate is undefined (e.g. regularized rank >= N)."""


class ExcessiveSkipError(RidgeOptError):
    """Too many replicates failed numerically during an evaluation run."""

    def __init__(self, message, result=None):
        super().__init__(message)
        self.result = result
