"""Exception types shared across the package."""


class HmlabError(Exception):
    """Base class for package errors."""


class PointOutsideDomain(HmlabError):
    """A query point lies outside the open domain (or inside a removed region)."""


class DegenerateDomain(UserWarning):
    """Warning category: a basepoint sits within the absorption shell, so the
    sampled measure degenerates to a point mass at the nearest boundary point."""


class EmptyRegion(HmlabError):
    """No grid cell survives the clearance threshold at the marked point."""


class MassMismatch(HmlabError):
    """Total weights of two measures differ beyond the allowed tolerance."""


class SizeCap(HmlabError):
    """An exact-transport instance exceeds the configured atom cap."""


class UnsupportedDomain(HmlabError):
    """The requested analytic reference exists only for specific domains."""


class CalibrationFailed(HmlabError):
    """Bisection could not certify the target within its budget or above the
    floating-point resolvability floor."""
