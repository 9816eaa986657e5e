"""Named errors raised across the scheduler.

Every error exposes ``name`` (stable, machine-parsable) and ``exit_code``
(1 for validation problems, 2 for runtime failures).
"""

from typing import Dict, Type

VALIDATION_EXIT_CODE = 1
RUNTIME_EXIT_CODE = 2


class GeoCarbonError(Exception):
    """Base class for all scheduler errors."""

    exit_code = RUNTIME_EXIT_CODE

    @property
    def name(self) -> str:
        return type(self).__name__


class ValidationError(GeoCarbonError):
    """Input data, configuration or policy is invalid."""

    exit_code = VALIDATION_EXIT_CODE


class ParseError(ValidationError):
    """A data file line or value could not be parsed."""


class DuplicateRegion(ValidationError):
    """A region identifier appears more than once."""


class UnknownRegion(ValidationError):
    """A file references a region that is not in the region set."""


class ShapeMismatch(ValidationError):
    """A matrix does not have one row and one column per region."""


class NegativeLatency(ValidationError):
    """A latency entry is below zero."""


class MissingHour(ValidationError):
    """A trace has a gap or regions cover different hours."""


class NegativeValue(ValidationError):
    """A trace value is below zero."""


class DimensionMismatch(ValidationError):
    """Vector lengths do not match the region count."""


class InvalidParam(ValidationError):
    """A configuration or instance parameter is out of range."""


class InvalidSpec(ValidationError):
    """A policy specification is malformed."""


class OutOfRange(GeoCarbonError):
    """A forecast was requested outside the trace domain."""


class InstanceTooLarge(GeoCarbonError):
    """An instance exceeds the exhaustive-search guard."""


class TraceExhausted(GeoCarbonError):
    """The simulation ran past the end of the traces."""


ERRORS_BY_NAME: Dict[str, Type[GeoCarbonError]] = {
    cls.__name__: cls
    for cls in (
        ParseError,
        DuplicateRegion,
        UnknownRegion,
        ShapeMismatch,
        NegativeLatency,
        MissingHour,
        NegativeValue,
        DimensionMismatch,
        InvalidParam,
        InvalidSpec,
        OutOfRange,
        InstanceTooLarge,
        TraceExhausted,
    )
}


def exit_code_for(error_name: str) -> int:
    """Map an error name to the CLI exit code; unknown names are runtime failures."""
    cls = ERRORS_BY_NAME.get(error_name)
    return cls.exit_code if cls is not None else RUNTIME_EXIT_CODE
