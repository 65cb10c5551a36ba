"""Exception hierarchy shared across the package."""


class RkhsppError(Exception):
    """Base class for all package-specific errors."""


class ValidationError(RkhsppError, ValueError):
    """Invalid argument or inconsistent inputs."""


class DataFormatError(RkhsppError, ValueError):
    """Malformed CSV / serialized artifact."""


class SingularSystemError(RkhsppError, ArithmeticError):
    """A linear system or covariance matrix is numerically singular."""


class NumericalError(RkhsppError, ArithmeticError):
    """A numerical routine failed to meet its documented tolerance."""
