"""Exception hierarchy shared by the graftlab modules."""
from __future__ import annotations

from typing import Any, List, Optional


class GraftlabError(Exception):
    """Base class for every error raised by graftlab."""

    exit_code = 2


class GraftlabValidationError(GraftlabError, ValueError):
    """Raised when inputs fail a documented precondition."""

    exit_code = 1


class GraftlabNumericError(GraftlabError, RuntimeError):
    """Raised when a numeric computation cannot produce a trustworthy value."""

    exit_code = 2


class NotLoxodromicError(GraftlabValidationError):
    """Raised when a loxodromic Möbius map is required."""


class IdentityMapError(GraftlabValidationError):
    """Raised when fixed points of the identity are requested."""


class CirclesIntersectError(GraftlabValidationError):
    """Raised when two boundary circles meet."""


class DisjointError(GraftlabValidationError):
    """Raised when two geodesics share no interior point."""


class IndexMismatchError(GraftlabValidationError):
    """Raised when weights are indexed against a different traintrack."""


class TooLargeError(GraftlabValidationError):
    """Raised when a traintrack exceeds the enumeration cap."""


class InvalidWeightsError(GraftlabValidationError):
    """Raised when weights violate nonnegativity or switch conditions."""

    def __init__(self, message: str, report: Optional[Any] = None) -> None:
        super().__init__(message)
        self.report = report


class UnknownLoopError(GraftlabValidationError):
    """Raised when a loop id or word cannot be resolved."""


class NonPositiveError(GraftlabValidationError):
    """Raised when a strictly positive quantity is required."""


class NotAdjacentError(GraftlabValidationError):
    """Raised when two cylinders do not share a boundary circle."""


class DegenerateCoreError(GraftlabValidationError):
    """Raised when a core segment is too short to carry a correction."""


class DegenerateError(GraftlabValidationError):
    """Raised when a matrix, circle or quadrilateral is degenerate."""


class UnknownSubcommandError(GraftlabValidationError):
    """Raised when the CLI receives an unknown subcommand."""


class UnknownPresetError(GraftlabValidationError):
    """Raised when a preset name is not registered."""


class ConfigParseError(GraftlabValidationError):
    """Raised when a configuration file cannot be parsed."""

    def __init__(
        self,
        message: str,
        field_path: Optional[str] = None,
        line: Optional[int] = None,
        column: Optional[int] = None,
    ) -> None:
        location = ""
        if field_path:
            location = f" (field {field_path})"
        elif line is not None:
            location = f" (line {line}, column {column})"
        super().__init__(f"{message}{location}")
        self.field_path = field_path
        self.line = line
        self.column = column


class InfeasibleError(GraftlabNumericError):
    """Raised when no nonnegative integer solution exists in the search region."""


class SingularJacobianError(GraftlabNumericError):
    """Raised when a sampled differential is (numerically) singular."""

    def __init__(self, message: str, location: Optional[Any] = None) -> None:
        super().__init__(f"{message} at {location}" if location is not None else message)
        self.location = location


class NonPositiveLeafLengthError(GraftlabNumericError):
    """Raised when a synthesized vertical leaf would not have positive length."""


class CollarTooTallError(GraftlabNumericError):
    """Raised when a leaf is too short to hold two unit collars."""


class OutputError(GraftlabNumericError):
    """Raised when a result file cannot be written."""


class ExperimentFailedError(GraftlabNumericError):
    """Raised when an experiment stops part way; carries the rows computed so far."""

    def __init__(self, message: str, rows: Optional[List[Any]] = None) -> None:
        super().__init__(message)
        self.rows = list(rows or [])
