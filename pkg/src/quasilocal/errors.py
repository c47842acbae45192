"""Exception and warning types shared across the package."""


class QuasilocalError(Exception):
    """Base class for all package errors."""


class DomainError(QuasilocalError, ValueError):
    """Input outside the mathematical domain of an operation."""


class BandLimitError(QuasilocalError, ValueError):
    """Grid too coarse for the requested spherical-harmonic band limit."""


class CoverageError(QuasilocalError, ValueError):
    """Requested radius lies outside the range covered by a radial solution."""


class IntegrationError(QuasilocalError, RuntimeError):
    """ODE integration failed (step-size underflow or non-convergence)."""


class ResolutionError(QuasilocalError, RuntimeError):
    """Surface-geometry resolution too coarse; self-check failed."""


class FitError(QuasilocalError, ValueError):
    """Degenerate or under-determined least-squares design."""


class ConfigError(QuasilocalError, ValueError):
    """Scenario configuration failed schema or semantic validation."""


class SolvabilityWarning(UserWarning):
    """Kernel component of an elliptic source exceeds the solvability tolerance."""
