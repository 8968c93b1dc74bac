"""Exceptions shared by the search modules."""

from __future__ import annotations


class CapExceededError(RuntimeError):
    """An enumeration or search would exceed its configured size cap."""

    def __init__(self, message: str, count: int | None = None):
        super().__init__(message)
        self.count = count


class SearchCapExceeded(CapExceededError):
    """A search hit its evaluation cap; carries the non-exact partial result."""

    def __init__(self, message: str, partial, stats):
        super().__init__(message, stats.policies_evaluated)
        self.partial = partial
        self.stats = stats
        self.exact = False


class InfeasibleRootError(RuntimeError):
    """The search root violates the safety bound, so no feasible start exists."""
