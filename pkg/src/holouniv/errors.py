"""Exception types shared across the package."""


class HolounivError(Exception):
    """Base class for all package errors."""


class GeometryError(HolounivError, ValueError):
    """Malformed geometry: self-intersecting 'simple' polylines, bad faces, etc."""


class PreconditionError(HolounivError, ValueError):
    """An operation precondition failed.  Carries a witness payload when available."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class IndeterminateError(HolounivError, RuntimeError):
    """Raster component detection stayed unstable up to the resolution cap."""

    def __init__(self, message, counts=None):
        super().__init__(message)
        self.counts = counts or []


class NonvanishingViolation(HolounivError, ValueError):
    """A winding-number integrand came too close to zero on the contour."""

    def __init__(self, message, min_modulus=None):
        super().__init__(message)
        self.min_modulus = min_modulus


class PoleProximityError(HolounivError, ValueError):
    """Rational function evaluated too close to one of its poles."""


class ConditioningError(HolounivError, RuntimeError):
    """Least-squares system remained ill conditioned after scaling and ridge."""

    def __init__(self, message, condition_estimate=None):
        super().__init__(message)
        self.condition_estimate = condition_estimate


class NotInImageError(HolounivError, ValueError):
    """Requested inverse for a point that is not in the image compact."""


class ConstructionError(HolounivError, RuntimeError):
    """A constructive procedure (exhaustion, corridor plan, induction step) failed."""


class SceneError(HolounivError, ValueError):
    """Scene file violates the schema.  Carries the path of the offending field."""

    def __init__(self, message, path=""):
        super().__init__(f"{path}: {message}" if path else message)
        self.path = path
