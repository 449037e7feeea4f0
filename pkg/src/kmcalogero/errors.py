"""Exception types shared across the package.

Each carries the CLI exit code it maps to, so the command layer can translate
without a lookup table.
"""

from __future__ import annotations


class KMCError(Exception):
    exit_code = 1
    code = "error"


class PoleProximity(KMCError, ArithmeticError):
    """A summand's denominator is too close to zero (the point sits on a mirror)."""

    exit_code = 3
    code = "pole"

    def __init__(self, message: str, *, mirror: tuple | None = None):
        super().__init__(message)
        self.mirror = mirror


class TailNotCertified(KMCError, ArithmeticError):
    exit_code = 3
    code = "tail"


class TableTooSmall(KMCError, ValueError):
    exit_code = 2
    code = "table"


class IntegerOverflow(KMCError, OverflowError):
    """Raised when an exact integer sequence leaves the signed 64-bit range."""

    exit_code = 3
    code = "overflow"


class MemoryBudgetExceeded(KMCError, MemoryError):
    exit_code = 3
    code = "memory"


class InvariantViolation(KMCError, AssertionError):
    """An internal consistency check failed; indicates a bug, not bad input."""

    exit_code = 1
    code = "invariant"


class CacheFileError(KMCError, IOError):
    exit_code = 4
    code = "io"
