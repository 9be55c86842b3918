"""Exception hierarchy shared across the package."""

from __future__ import annotations


class TatunerError(Exception):
    """Base class for all tatuner errors."""


class ParseError(TatunerError):
    """Model text does not conform to the grammar."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"{line}:{column}: {message}")
        self.line = line
        self.column = column


class SemanticError(TatunerError):
    """Structurally invalid model (unknown names, duplicates, no initial)."""


class LimitExceeded(TatunerError):
    """Zone exploration exceeded its visited-state budget."""


class BudgetExceeded(TatunerError):
    """An enumeration or optimization exhausted its call budget."""


class InsufficientInput(TatunerError):
    """shrink was given a reduction that is not sufficient."""


class SufficientInput(TatunerError):
    """enlarge was given a reduction that is not insufficient."""


class NoStructuralPath(TatunerError):
    """Removing every tunable constraint still leaves the target unreachable."""


class AlreadyReachable(TatunerError):
    """The target set is reachable on the unmodified automaton."""


class InfeasibleSystem(TatunerError):
    """A difference system that must be feasible is not; indicates a bug upstream."""


class NonMonotoneOracle(TatunerError):
    """The lattice optimizer observed a dominance violation in its oracle."""


class InvalidParams(TatunerError):
    """Benchmark generator parameters outside the supported family."""
