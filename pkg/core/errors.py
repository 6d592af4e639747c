"""
Error types for CMS-Wheat.

Validation problems with user inputs derive from ``InputValidationError`` and
map to exit code 2 on the command line; broken model invariants raise
``InvariantViolation``.
"""
from typing import Optional


class CmsWheatError(Exception):
    """Base class for all simulator errors."""


class InputValidationError(CmsWheatError):
    """
    Invalid user-supplied input.

    Args:
        message: Human readable description
        source: File the problem was found in, if any
        line: 1-based line number in ``source``, if any
        field: Offending column or key, if any
    """

    def __init__(
        self,
        message: str,
        source: Optional[str] = None,
        line: Optional[int] = None,
        field: Optional[str] = None,
    ):
        self.source = source
        self.line = line
        self.field = field
        location = []
        if source:
            location.append(str(source))
        if line is not None:
            location.append(f"line {line}")
        if field:
            location.append(f"field '{field}'")
        if location:
            message = f"{', '.join(location)}: {message}"
        super().__init__(message)


class ConfigError(InputValidationError):
    """Invalid configuration file or parameter value."""


class DataError(InputValidationError):
    """Invalid or incomplete balance or prepared input data."""


class ScenarioError(InputValidationError):
    """Invalid scenario definition."""


class InvariantViolation(AssertionError):
    """A model invariant was broken; the run cannot continue."""
