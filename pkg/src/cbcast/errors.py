"""Exception types shared across the package."""

from __future__ import annotations


class CBError(Exception):
    """Base class for all analysis errors raised by cbcast."""


class Inconsistent(CBError):
    """A linear system A X = B has no solution."""


class NotNested(CBError):
    """Basis extension was asked to extend a subspace it does not contain."""


class TooLarge(CBError):
    """An enumeration guard was exceeded."""


class DegenerateDemand(CBError):
    """H(w1, w2) = 0, so the capacity ratio is undefined."""


class DecompositionInvariantViolated(CBError):
    """The a/b/c partition failed one of its rank identities (a defect)."""


class FactorizationFailed(CBError):
    """A factor matrix that must exist could not be solved for (a defect)."""


class InvalidCycle(CBError):
    """A cell sequence does not alternate row and column steps."""


class CycleBudgetExceeded(CBError):
    """Cycle enumeration produced more cycles than the allowed budget."""


class WrongShape(CBError):
    """An operation that needs a specific grid shape got another one."""


class DegenerateConfig(CBError):
    """A binning configuration leaves fewer than one bin."""


class SearchBudgetExceeded(CBError):
    """The coloring search ran out of nodes; ``result`` holds the best found."""

    def __init__(self, message: str, result=None):
        super().__init__(message)
        self.result = result


class ParseError(CBError):
    """An instance file is not well formed; ``pointer`` is a JSON pointer."""

    def __init__(self, message: str, pointer: str = ""):
        super().__init__(f"{pointer or '/'}: {message}")
        self.pointer = pointer


class InvariantError(CBError):
    """An instance parsed but violates a semantic invariant."""
