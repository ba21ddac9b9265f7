"""Error hierarchy for the toolkit. Every error carries the CLI exit code it maps to."""

from typing import Any, Dict, Optional


class DualAutError(Exception):
    """Base class for all toolkit errors."""

    exit_code: int = 1


class UsageError(DualAutError, ValueError):
    """Invalid input: bad letters, mismatched bases, out-of-range indices."""

    exit_code = 1


class SpecSyntaxError(UsageError):
    """Automorphism file text does not match the grammar."""

    def __init__(self, message: str, line: int, column: int):
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class NotAnAutomorphism(DualAutError, ValueError):
    """Generator images do not define an automorphism of F_N."""

    exit_code = 2


class PropertyViolation(DualAutError, AssertionError):
    """Two independent computations disagree where they must agree."""

    exit_code = 2

    def __init__(self, message: str, witness: Optional[Dict[str, Any]] = None):
        self.witness = witness or {}
        super().__init__(message)


class ResourceBudgetExceeded(DualAutError, RuntimeError):
    """An enumeration or iteration budget would be exceeded."""

    exit_code = 3

    def __init__(self, message: str, required: Optional[int] = None, budget: Optional[int] = None):
        self.required = required
        self.budget = budget
        super().__init__(message)


class InconclusiveOracle(ResourceBudgetExceeded):
    """The boundary oracle could not stabilize within depth or budget."""


class NumericError(DualAutError, ArithmeticError):
    """Eigenvalue iteration failed to converge."""

    exit_code = 3

    def __init__(self, message: str, diagnostics: Optional[Dict[str, Any]] = None):
        self.diagnostics = diagnostics or {}
        super().__init__(f"{message} ({self.diagnostics})" if diagnostics else message)
