"""Exception hierarchy shared by every spraylab module."""


class SpraylabError(Exception):
    """Base class for all package errors."""


class DomainError(SpraylabError, ValueError):
    """A point lies outside a chart, or a field is not smooth there."""


class SmoothnessError(SpraylabError):
    """A derivative order beyond what a field supports was requested."""


class EmptyGridError(SpraylabError):
    """Sampling produced no admissible tangent vectors."""


class NonPositiveValue(SpraylabError, ValueError):
    """A log-scale fit was attempted on a non-positive value."""


class NonHomogeneousError(SpraylabError, ValueError):
    """Scaling estimates of a homogeneity degree disagree."""


class DegenerateMetric(SpraylabError, ArithmeticError):
    """The fiber Hessian of F^2 is singular at a point."""


class NotBasic(SpraylabError, ValueError):
    """A function expected to depend on x only varies along the fibers."""


class PreconditionFailed(SpraylabError):
    """A scenario hypothesis does not hold for the given inputs."""
