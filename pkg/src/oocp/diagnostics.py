"""Diagnostics produced by the static and instance-level checkers.

Every diagnostic carries a stable ``code`` drawn from the closed set below, a
``subject`` path naming the offending element, a human-readable ``message``,
and, where available, the ``axiom`` (model source location or constraint name)
it violates.  Tests assert on codes, never on message text.

Codes
-----
Object table:
    DuplicateReference, AbstractInstantiation, UnusedReference,
    DomainViolation, MissingAttribute, UnknownAttribute, UnknownClass,
    DanglingReference
Class system:
    MissingDiscriminator, PartitionRootNotAbstract, PartitionChildNotAbstract
Relations:
    TypeMismatch, NotFunctional, NotTotal, NotInjective, NotSurjective,
    SharedComponent, InverseNotTotal, MultiplicityViolation, BadSequence,
    DuplicateInSequence, SubsetViolation, MissingAssociationData,
    DanglingAssociationData
Constraints:
    InvariantViolation, ConstraintViolation, ConstraintEvalError
"""

from __future__ import annotations

from dataclasses import dataclass, field

CODES = frozenset(
    {
        "DuplicateReference",
        "AbstractInstantiation",
        "UnusedReference",
        "DomainViolation",
        "MissingAttribute",
        "UnknownAttribute",
        "UnknownClass",
        "DanglingReference",
        "MissingDiscriminator",
        "PartitionRootNotAbstract",
        "PartitionChildNotAbstract",
        "TypeMismatch",
        "NotFunctional",
        "NotTotal",
        "NotInjective",
        "NotSurjective",
        "SharedComponent",
        "InverseNotTotal",
        "MultiplicityViolation",
        "BadSequence",
        "DuplicateInSequence",
        "SubsetViolation",
        "MissingAssociationData",
        "DanglingAssociationData",
        "InvariantViolation",
        "ConstraintViolation",
        "ConstraintEvalError",
    }
)


@dataclass(frozen=True)
class Diagnostic:
    code: str
    subject: str
    message: str
    axiom: str = ""

    def __post_init__(self):
        assert self.code in CODES, f"unknown diagnostic code {self.code!r}"

    def as_dict(self) -> dict:
        return {
            "code": self.code,
            "subject": self.subject,
            "axiom": self.axiom,
            "message": self.message,
        }

    def render(self) -> str:
        where = f" [{self.axiom}]" if self.axiom else ""
        return f"{self.code}: {self.subject}: {self.message}{where}"


@dataclass
class ParseError:
    """A syntax or resolution error with its source position."""

    message: str
    line: int
    column: int
    expected: tuple[str, ...] = field(default_factory=tuple)

    def render(self) -> str:
        hint = f" (expected {', '.join(self.expected)})" if self.expected else ""
        return f"line {self.line}, column {self.column}: {self.message}{hint}"


class ParseFailure(Exception):
    """Raised by the model parser; carries every collected ParseError."""

    def __init__(self, errors: list[ParseError]):
        super().__init__("; ".join(e.render() for e in errors))
        self.errors = errors
