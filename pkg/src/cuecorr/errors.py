"""Exception classes shared across the package.

The CLI maps each class to a fixed exit status, see :mod:`cuecorr.cli`.
"""


class CueCorrError(Exception):
    """Base class for all package errors."""

    exit_code = 1


class ConfigError(CueCorrError, ValueError):
    """Malformed or out-of-range run configuration."""

    exit_code = 2


class CapacityError(CueCorrError):
    """Requested enumeration or lattice box exceeds the configured budget."""

    exit_code = 3


class ToleranceError(CueCorrError):
    """A numerical procedure failed to reach its declared tolerance."""

    exit_code = 4

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class NumericalConsistencyError(ToleranceError):
    """An internal exactness check failed (e.g. a non-integer cumulant)."""
