"""Exception and warning types shared across the package.

Each exception class carries the process exit code the command-line
driver uses when it escapes a command.
"""


class FrengateError(Exception):
    exit_code = 1


class ConfigError(FrengateError, ValueError):
    """Malformed or unknown configuration."""

    exit_code = 2


class DomainError(FrengateError, ValueError):
    """Numerical-domain violation: poles on the grid, windows too small."""

    exit_code = 3


class ConvergenceError(FrengateError, RuntimeError):
    """An iterative or time-stepping routine failed its accuracy gate."""

    exit_code = 4


class WindowWarning(UserWarning):
    """A frequency window truncates a non-negligible part of a function."""


class TruncationWarning(UserWarning):
    """A finite basis or series truncation is not converged."""
