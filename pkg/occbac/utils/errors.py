"""
Exception hierarchy shared by the library and the command line.

Every domain failure derives from :class:`OccbacError` and also from the
built-in type it most resembles, so callers that only know about
``ValueError`` or ``RuntimeError`` keep working.
"""

from typing import Optional


class OccbacError(Exception):
    """Base class for all occbac failures."""

    exit_code = 1


class ConfigError(OccbacError, ValueError):
    """
    Experiment configuration could not be parsed or validated.

    Args:
        message: Human readable description
        line: 1-based line of the offending token, when known
        column: 1-based column of the offending token, when known
    """

    exit_code = 2

    def __init__(self, message: str, line: Optional[int] = None, column: Optional[int] = None):
        self.line = line
        self.column = column
        if line is not None:
            location = f"line {line}" + (f", column {column}" if column is not None else "")
            message = f"{message} ({location})"
        super().__init__(message)


class CapacityError(OccbacError, ValueError):
    """A joint posterior table would exceed the configured subset cap."""

    exit_code = 3


class InconsistentMeasurementError(OccbacError, RuntimeError):
    """Every configuration of a joint posterior has probability zero."""

    exit_code = 5


class SelfCheckError(OccbacError, AssertionError):
    """An oracle disagreed with a production code path."""

    exit_code = 6


class ScenarioFormatError(OccbacError, ValueError):
    """A scenario or field file is malformed."""

    exit_code = 7

    def __init__(self, message: str, line: Optional[int] = None):
        self.line = line
        if line is not None:
            message = f"{message} (line {line})"
        super().__init__(message)


# I/O failures are reported with the built-in OSError family.
IO_EXIT_CODE = 4
