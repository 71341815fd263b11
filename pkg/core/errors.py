"""
Exception hierarchy shared by every module.

All errors derive from ValueError so callers that only care about bad input
can keep catching ValueError.
"""
from typing import Optional


class CascadeError(ValueError):
    """Base class for all domain errors."""


class EmptyInputError(CascadeError):
    """The input holds no usable records."""


class MissingHeaderError(CascadeError):
    """The CSV does not start with the required header."""


class MalformedLineError(CascadeError):
    def __init__(self, line_no: int, reason: str, raw: Optional[str] = None):
        self.line_no = line_no
        self.reason = reason
        self.raw = raw
        super().__init__(f"line {line_no}: {reason}")


class MixedTimestampFormatsError(CascadeError):
    """Epoch and RFC 3339 timestamps appear in the same file."""


class NoSeedsError(CascadeError):
    """No seed record exists and orphans are rejected."""


class SeriesInvariantError(CascadeError):
    """A GenerationSeries violates one of its accounting identities."""


class UptoZeroError(CascadeError):
    """An MSE was requested over zero generations."""


class KOutOfRangeError(CascadeError):
    """The prefix length is outside 1..G."""


class UnknownGenerationError(CascadeError):
    """A generation index is not present in the matrix."""


class InvalidParamsError(CascadeError):
    """Model or simulation parameters are out of range."""


class InvalidConfigError(CascadeError):
    """A configuration value cannot be used."""


class InfeasibleReconstructionError(CascadeError):
    """No event log can reproduce the requested aggregate tables."""
