"""Off-diagonal solutions of the moment system (the Prouhet-Tarry-Escott regime).

A witness is a pair of distinct s-element sides with equal power sums of
degree 1..n.  Translation-dilation invariance turns one witness into
~X^2 of them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations, combinations_with_replacement
from typing import Iterator, Sequence

import numpy as np

from .counting import power_sums
from .errors import DomainError


@dataclass(frozen=True)
class OffDiagonalSolution:
    """An ordered 2s-tuple solving the degree-n system with non-equal halves."""

    x: tuple[int, ...]
    n: int
    X: int

    def __post_init__(self):
        if len(self.x) % 2 or not self.x:
            raise DomainError("tuple must have even positive length")
        left, right = self.sides
        if power_sums(left, self.n) != power_sums(right, self.n):
            raise DomainError(f"{self.x} does not solve the degree-{self.n} system")
        if sorted(left) == sorted(right):
            raise DomainError(f"{self.x} is diagonal")
        if min(self.x) < 1 or max(self.x) > self.X:
            raise DomainError(f"entries of {self.x} outside [1, {self.X}]")

    @property
    def s(self) -> int:
        return len(self.x) // 2

    @property
    def sides(self) -> tuple[tuple[int, ...], tuple[int, ...]]:
        return self.x[: self.s], self.x[self.s :]

    def to_dict(self) -> dict:
        left, right = self.sides
        return {"n": self.n, "s": self.s, "X_max": self.X, "sides": [list(left), list(right)]}


@dataclass(frozen=True)
class PTESearchResult:
    """Outcome of :func:`find_offdiagonal`.

    ``status`` is ``"found"``, ``"none"`` (the whole range was searched, so
    no witness exists there) or ``"budget"`` (stopped early; nothing is
    proven about the unsearched part).
    """

    witness: OffDiagonalSolution | None
    status: str
    n: int
    s: int
    X_max: int
    scanned: int

    def to_dict(self) -> dict:
        d = {"n": self.n, "s": self.s, "X_max": self.X_max, "status": self.status, "scanned": self.scanned}
        d["sides"] = self.witness.to_dict()["sides"] if self.witness else None
        return d


def find_offdiagonal(
    n: int, s: int, X_max: int, budget: int = 10**7, distinct: bool = True
) -> PTESearchResult:
    """Search sides over {1..X_max} for equal power sums of degree 1..n.

    Sides are s-subsets (``distinct=True``) or s-multisets.  They are
    enumerated level by level in their largest entry, keyed by the exact
    power-sum vector.  After the first level that produces a collision,
    every witness with that largest entry is known and the lexicographically
    least pair (A, B), A < B, is returned.  So the witness minimises the
    largest entry first, then lexicographic order.
    """
    if s < 1 or n < 1:
        raise DomainError("n and s must be >= 1")
    seen: dict[tuple, list[tuple[int, ...]]] = {}
    scanned = 0
    for top in range(1, X_max + 1):
        pool = range(1, top) if distinct else range(1, top + 1)
        rest = combinations(pool, s - 1) if distinct else combinations_with_replacement(pool, s - 1)
        hits = []
        for head in rest:
            side = head + (top,)
            scanned += 1
            if scanned > budget:
                return PTESearchResult(None, "budget", n, s, X_max, scanned - 1)
            key = power_sums(side, n)
            bucket = seen.setdefault(key, [])
            hits.extend((min(other, side), max(other, side)) for other in bucket)
            bucket.append(side)
        if hits:
            a, b = min(hits)
            return PTESearchResult(OffDiagonalSolution(a + b, n, X_max), "found", n, s, X_max, scanned)
    return PTESearchResult(None, "none", n, s, X_max, scanned)


def amplify_indices(base: OffDiagonalSolution, X: int) -> Iterator[tuple[int, int]]:
    """(q, h) with 1 <= q < X/max(x) and 1 <= h <= X - q*max(x)."""
    top = max(base.x)
    q = 1
    while q * top < X:
        for h in range(1, X - q * top + 1):
            yield q, h
        q += 1


def amplify(base: OffDiagonalSolution, X: int) -> Iterator[OffDiagonalSolution]:
    """Yield q*x + h for every admissible (q, h); each is re-verified on construction."""
    for q, h in amplify_indices(base, X):
        yield OffDiagonalSolution(tuple(q * v + h for v in base.x), base.n, X)


def amplified_count(base: OffDiagonalSolution, X: int) -> int:
    top = max(base.x)
    return sum(max(0, X - q * top) for q in range(1, math.ceil(X / top)))


def growth_exponent(counts: Sequence[tuple[float, float]]) -> float:
    """Least-squares slope of log(count) against log(X)."""
    if len(counts) < 3:
        raise DomainError("need at least 3 data points")
    X = np.array([c[0] for c in counts], dtype=float)
    y = np.array([c[1] for c in counts], dtype=float)
    if np.any(np.diff(X) <= 0):
        raise DomainError("X values must be strictly increasing")
    if np.any(y <= 0):
        raise DomainError("counts must be positive")
    lx, ly = np.log(X), np.log(y)
    lx -= lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
