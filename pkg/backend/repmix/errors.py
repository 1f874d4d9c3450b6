"""Exception hierarchy shared by the library, the CLI and the HTTP service."""

from __future__ import annotations

from typing import Any, Dict, Optional


class RepmixError(Exception):
    """Base error; ``exit_code`` is what the CLI returns when it escapes."""

    exit_code = 1

    def __init__(self, message: str, details: Optional[Dict[str, Any]] = None) -> None:
        super().__init__(message)
        self.message = message
        self.details = details or {}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "error": type(self).__name__,
            "message": self.message,
            "exit_code": self.exit_code,
            "details": self.details,
        }


class InputError(RepmixError, ValueError):
    """Raised for malformed user input: bad shapes, files, or argument values."""

    exit_code = 2


class DatasetNotFoundError(InputError, FileNotFoundError):
    """Raised when a dataset file the run refers to does not exist."""


class NumericalError(RepmixError):
    exit_code = 3


class SamplerError(NumericalError):
    """Raised when a slice region carries no numerically usable mass."""


class InvariantViolation(NumericalError):
    """Raised when the chain state leaves the support of the prior."""


class InitializationError(NumericalError):
    """Raised when a jittered starting state still has h(gamma) = 0."""


class CalibrationError(RepmixError):
    exit_code = 4


__all__ = [
    "RepmixError",
    "InputError",
    "DatasetNotFoundError",
    "NumericalError",
    "SamplerError",
    "InvariantViolation",
    "InitializationError",
    "CalibrationError",
]
