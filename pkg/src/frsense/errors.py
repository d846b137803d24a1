"""Exception types raised across the package.

Everything derives from :class:`FrsenseError` so callers can catch one base
class at pipeline boundaries.  Errors that signal bad user input additionally
derive from ``ValueError``.
"""

from __future__ import annotations

__all__ = [
    "FrsenseError",
    "GridMismatchError",
    "AllZeroError",
    "NegativeValueError",
    "BaseMismatchError",
    "AntipodalOrBoundaryError",
    "EmptyInputError",
    "InsufficientSamplesError",
    "DegenerateSampleError",
    "EmptyDatasetError",
    "TruncationTooSmallError",
    "InvalidPhiError",
    "UnknownModelError",
    "UnknownParameterError",
    "InsufficientValuesError",
    "ConfigError",
    "ParseError",
    "NonPositiveForLogError",
]


class FrsenseError(Exception):
    """Base class for all package-specific errors."""


class GridMismatchError(FrsenseError, ValueError):
    """Two grid functions that must share a grid do not."""


class AllZeroError(FrsenseError, ValueError):
    """A raw density is identically zero and cannot be normalized."""


class NegativeValueError(FrsenseError, ValueError):
    """A raw density carries a negative value."""


class BaseMismatchError(FrsenseError, ValueError):
    """A tangent vector is anchored at a different base point than required."""


class AntipodalOrBoundaryError(FrsenseError, ValueError):
    """Points too far apart on the sphere for a well-defined log map."""


class EmptyInputError(FrsenseError, ValueError):
    """An operation received an empty collection."""


class InsufficientSamplesError(FrsenseError, ValueError):
    """Too few draws for the requested computation."""


class DegenerateSampleError(FrsenseError, ValueError):
    """A posterior sample has (numerically) zero spread."""


class EmptyDatasetError(FrsenseError, ValueError):
    """A dataset with no observations."""


class TruncationTooSmallError(FrsenseError, ValueError):
    """Stick-breaking truncation left unassigned mass after absorption."""


class InvalidPhiError(FrsenseError, ValueError):
    """The component-variance shape parameter must exceed 1."""


class UnknownModelError(FrsenseError, ValueError):
    """Model tag not one of dp, dpgmm, ccv, dcv."""


class UnknownParameterError(FrsenseError, ValueError):
    """Sweep parameter does not name a scalar field of the model config."""


class InsufficientValuesError(FrsenseError, ValueError):
    """Too few values for a band or a sweep grid."""


class ConfigError(FrsenseError, ValueError):
    """Experiment configuration failed validation.

    ``code`` is a stable machine-readable identifier (for example
    ``CONFIG_BAD_PARAM``) surfaced by the command line interface.
    """

    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


class ParseError(FrsenseError, ValueError):
    """A data file failed to parse; carries the 1-based line number."""

    def __init__(self, message: str, line_number: int):
        super().__init__(f"line {line_number}: {message}")
        self.line_number = line_number


class NonPositiveForLogError(FrsenseError, ValueError):
    """A log transform was requested for data with values <= 0."""
