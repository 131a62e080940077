"""Error types shared by all computation modules."""
from typing import Optional


class LabError(Exception):
    """Base class for every error raised by the laboratory."""

    exit_code = 2


class InvalidArgumentError(LabError, ValueError):
    """An argument violates an operation's precondition."""


class DomainError(LabError, ValueError):
    """The requested object does not exist for the given parameters."""


class ResourceError(LabError):
    """A basis, search space or matrix exceeds its configured cap."""


class NumericError(LabError, ArithmeticError):
    """A numerical procedure failed or produced a non-finite value."""

    exit_code = 3

    def __init__(self, message: str, shell: Optional[int] = None, residual: Optional[float] = None):
        super().__init__(message)
        self.shell = shell
        self.residual = residual


class ConfigError(LabError, ValueError):
    """Configuration text could not be validated."""

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
