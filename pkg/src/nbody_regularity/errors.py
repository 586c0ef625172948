"""Exception types raised across the package."""

__all__ = [
    "GeometryError",
    "DegenerateInput",
    "AmbientMismatch",
    "ContainsAmbient",
    "UnknownMember",
    "NonFinite",
    "SingularMap",
    "DomainError",
    "PoleError",
    "DegenerateSubspace",
    "OnBlownCenter",
    "DegenerateDirection",
    "OnSingularSet",
    "EmptyIntersection",
    "InvalidEigenpair",
    "StencilTooWide",
    "ConfigError",
]


class GeometryError(ValueError):
    """Base class for all domain errors in this package."""


class DegenerateInput(GeometryError):
    pass


class AmbientMismatch(GeometryError):
    pass


class ContainsAmbient(GeometryError):
    pass


class UnknownMember(GeometryError, KeyError):
    def __str__(self):
        return ValueError.__str__(self)


class NonFinite(GeometryError):
    pass


class SingularMap(GeometryError):
    pass


class DomainError(GeometryError):
    pass


class PoleError(GeometryError):
    pass


class DegenerateSubspace(GeometryError):
    pass


class OnBlownCenter(GeometryError):
    pass


class DegenerateDirection(GeometryError):
    pass


class OnSingularSet(GeometryError):
    """The point lies on the union of the semilattice members."""


class EmptyIntersection(GeometryError):
    pass


class InvalidEigenpair(GeometryError):
    pass


class StencilTooWide(GeometryError):
    """A finite-difference stencil would reach the singular set."""


class ConfigError(GeometryError):
    """Unreadable or malformed input file."""
