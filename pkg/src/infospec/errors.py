"""Exception types shared across the package.

Every error carries the name of the offending parameter in ``param`` so the
command-line front end can report it without parsing messages.
"""


class InfospecError(Exception):
    """Base class for all package errors."""

    def __init__(self, message, param=None):
        super().__init__(message)
        self.param = param


class ConfigError(InfospecError, ValueError):
    """Malformed channel, input or scenario configuration."""


class UsageError(InfospecError, ValueError):
    """Operation invoked with inconsistent arguments."""


class DomainError(InfospecError, ValueError):
    """A density was requested at a zero-probability point."""


class ResourceCapError(InfospecError):
    """Exact enumeration would exceed the configured table-size cap."""


class UnsupportedError(InfospecError):
    """The requested mode is not available for this channel kind."""


class InvariantViolation(InfospecError):
    """A guaranteed mathematical property failed at run time (indicates a bug)."""
