"""Shared error types: capacity, feasibility, and search failures."""


class CapacityError(ValueError):
    """Input exceeds a documented table, sieve, or memory capacity."""


class InfeasibleError(ValueError):
    """A constraint system has no solution."""


class SearchError(RuntimeError):
    """A bounded scan exhausted its budget before succeeding."""
