"""Exception types shared across the package."""


class OptivoteError(Exception):
    """Base class for all package errors."""


class ConfigError(OptivoteError):
    """Invalid or missing configuration."""


class UsageError(OptivoteError):
    """API called with arguments outside its documented domain."""


class FormatError(OptivoteError):
    """Malformed external file (e.g. IDX dataset)."""


class NumericError(OptivoteError):
    """Non-finite value where a finite one is required."""
