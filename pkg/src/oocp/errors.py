"""Exception types shared across the package."""


class OocpError(Exception):
    """Base class for all errors raised by this package."""


class UnknownClass(OocpError):
    """A class name does not resolve against the model."""


class UnknownRelation(OocpError):
    """A relation name does not resolve against the model."""


class UnknownAttribute(OocpError):
    """An attribute is not part of the object's class structure."""


class DanglingReference(OocpError):
    """An object reference does not name any object of the instance."""


class CycleError(OocpError):
    """The inheritance graph contains a cycle."""


class TypeConflict(OocpError):
    """Two parents contribute identically named attributes with different domains."""


class SortError(OocpError):
    """An expression is not well sorted (static check)."""

    def __init__(self, message, loc=None):
        super().__init__(message)
        self.loc = loc


class EvalError(OocpError):
    """Base class for runtime evaluation failures."""


class NonUniqueValue(EvalError):
    """A unique-value traversal hit zero or several distinct values."""


class EmptyAggregate(EvalError):
    """bagmin/bagmax applied to an empty bag."""


class ArithmeticEvalError(EvalError):
    """Division or modulo by zero inside a constraint."""


class LoadError(OocpError):
    """An instance file does not conform to the instance schema."""

    def __init__(self, message, location=None):
        if location:
            message = f"{location}: {message}"
        super().__init__(message)
        self.location = location


class OracleTooLarge(OocpError):
    """The brute-force assignment space exceeds the configured guard."""


class BudgetExceeded(OocpError):
    """The solver ran out of its wall-clock budget."""


class BoundWarning(UserWarning):
    """A solution touched the configured cap of an unbounded integer domain,
    so exhaustiveness beyond the cap is not guaranteed."""
