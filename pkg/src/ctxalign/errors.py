"""Exception types shared across the package."""

from __future__ import annotations


class CtxAlignError(Exception):
    """Base class for every error raised by ctxalign."""


class ValidationError(CtxAlignError, ValueError):
    """A structural invariant of the ontology model was violated."""


class ParseError(ValidationError):
    """Malformed input file. Carries a 1-based row/field locator when known."""

    def __init__(self, message: str, row: int | None = None, field: str | None = None):
        self.row = row
        self.field = field
        self.reason = message
        where = []
        if row is not None:
            where.append(f"row {row}")
        if field is not None:
            where.append(f"field '{field}'")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)


class KindMismatchError(ValidationError):
    """A relation holds descriptor triples of the wrong kind for the operation."""


class UnknownIdError(CtxAlignError, LookupError):
    """An entity/property id was requested that the ontology does not contain."""

    def __str__(self) -> str:
        return str(self.args[0]) if self.args else "unknown id"


class UndefinedMetricError(CtxAlignError, ArithmeticError):
    """Similarity aggregate is undefined (no pairs, or every weight is zero)."""


class UndefinedImprovementError(CtxAlignError, ArithmeticError):
    """Relative improvement is undefined because the baseline similarity is zero."""


class DomainError(CtxAlignError, ValueError):
    """Numeric argument outside the mathematical domain of the function."""


class ChecksumError(CtxAlignError):
    """Bundled reference data does not match its recorded checksum."""
