"""Exception hierarchy shared across the package."""


class LpplScanError(Exception):
    """Base class for all package errors."""


class DomainError(LpplScanError, ValueError):
    """Mathematical domain violation (e.g. evaluation at or past the critical time)."""


class ConfigError(LpplScanError, ValueError):
    """Invalid configuration value or combination."""


class DataError(LpplScanError, ValueError):
    """Malformed or inconsistent input data."""


class UsageError(LpplScanError):
    """Bad command-line invocation."""
