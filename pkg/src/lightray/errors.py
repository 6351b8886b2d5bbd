"""Exception hierarchy shared by every module."""


class LightRayError(Exception):
    """Base class for all errors raised by the toolkit."""


class NumericalError(LightRayError):
    """A numerical procedure failed (maps to CLI exit status 3)."""


class SingularMetricError(NumericalError):
    pass


class FrameError(NumericalError):
    """The orthonormal frame could not be built with signature (-,+,...,+)."""


class IntegrationError(NumericalError):
    pass


class DomainError(NumericalError):
    """A trajectory or probe left the metric's declared chart domain."""


class RayError(NumericalError):
    """A light ray could not be built or canonicalized."""


class ChartError(NumericalError):
    """A ray or tangent vector lies outside the chart's domain."""


class RegularityError(ChartError):
    """The coordinate-change block A is numerically singular."""


class NonRegularCurveError(NumericalError):
    """The root function loses its transversality, so the recovered curve is not regular there."""


class ContinuationLostError(NumericalError):
    pass


class DimensionError(LightRayError, ValueError):
    pass


class ConfigError(LightRayError, ValueError):
    """Malformed scene configuration (maps to CLI exit status 2)."""
