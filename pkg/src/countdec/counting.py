"""Exact solution counts for phi(x_1)+...+phi(x_s) = phi(x_{s+1})+...+phi(x_{2s}).

Two engines are provided.  The brute-force engine enumerates every 2s-tuple
(as pairs of halves, compared coordinate by coordinate).  The
meet-in-the-middle engine builds a table of s-fold sums and uses
J = sum_v m_v^2.  The same table, with complex weights, yields exact even
moments of exponential sums.
"""
from __future__ import annotations

import math
import time
from collections import Counter
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Sequence

import numpy as np

from .errors import BudgetExceeded, DomainError, InvariantViolation

BRUTEFORCE_BUDGET = 10**8
TABLE_BUDGET = 2 * 10**7
AUTO_BRUTEFORCE_LIMIT = 10**6
_INT64_SAFE = 2**62


@dataclass(frozen=True)
class PhiMap:
    """phi: {1..N} -> Z^n given as an explicit table (``values[j-1] = phi(j)``)."""

    n: int
    values: tuple[tuple[int, ...], ...]
    kind: str = "custom"

    def __post_init__(self):
        if self.n < 1 or not self.values:
            raise DomainError("PhiMap needs n >= 1 and N >= 1")
        for v in self.values:
            if len(v) != self.n or not all(isinstance(c, Integral) for c in v):
                raise DomainError(f"phi values must be integer {self.n}-vectors, got {v!r}")

    @property
    def N(self) -> int:
        return len(self.values)

    @classmethod
    def moment_powers(cls, N: int, n: int) -> "PhiMap":
        return cls(n, tuple(tuple(j**k for k in range(1, n + 1)) for j in range(1, N + 1)), "moment-powers")

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]]) -> "PhiMap":
        rows = [tuple(int(c) for c in r) for r in rows]
        return cls(len(rows[0]), tuple(rows))

    def __call__(self, j: int) -> tuple[int, ...]:
        if not 1 <= j <= self.N:
            raise DomainError(f"phi is defined on 1..{self.N}, got {j}")
        return self.values[j - 1]

    def check_subset(self, S: Iterable[int]) -> tuple[int, ...]:
        S = tuple(sorted(set(int(j) for j in S)))
        if S and (S[0] < 1 or S[-1] > self.N):
            raise DomainError(f"subset must lie in 1..{self.N}")
        return S

    def describe(self) -> dict:
        return {"kind": self.kind, "N": self.N, "n": self.n}


def parse_phi_table(text: str) -> PhiMap:
    """Lines ``j v_1 ... v_n``; the j column must cover 1..N."""
    table = {}
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        j, *vals = (int(tok) for tok in line.split())
        table[j] = tuple(vals)
    N = len(table)
    if sorted(table) != list(range(1, N + 1)):
        raise DomainError("phi table must define phi(j) for j = 1..N exactly once")
    return PhiMap.from_rows([table[j] for j in range(1, N + 1)])


def parse_subset(text: str) -> tuple[int, ...]:
    return tuple(int(tok) for tok in text.split("#", 1)[0].replace(",", " ").split())


@dataclass(frozen=True)
class SolutionTally:
    n: int
    s: int
    subset: tuple[int, ...] = field(repr=False)
    J: int
    diagonal: int
    engine: str
    elapsed_ms: float = field(default=0.0, compare=False)

    @property
    def off_diagonal(self) -> int:
        return self.J - self.diagonal

    def to_dict(self, timing: bool = True) -> dict:
        S = self.subset
        full = S == tuple(range(1, len(S) + 1))
        d = {
            "n": self.n,
            "s": self.s,
            "X_or_subset": len(S) if full else list(S),
            "J": self.J,
            "diagonal": self.diagonal,
            "off_diagonal": self.off_diagonal,
            "engine": self.engine,
        }
        if timing:
            d["elapsed_ms"] = round(self.elapsed_ms, 3)
        return d


# ---------------------------------------------------------------------------
# diagonal counts and symmetric functions
# ---------------------------------------------------------------------------

def _partitions(s: int, largest: int | None = None):
    if s == 0:
        yield ()
        return
    largest = s if largest is None else largest
    for first in range(min(s, largest), 0, -1):
        for rest in _partitions(s - first, first):
            yield (first,) + rest


def diagonal_count(S, s: int) -> int:
    """Number of 2s-tuples over S whose second half rearranges the first.

    Equals sum over s-multisets M of S of perm(M)^2.  Multisets are grouped
    by multiplicity pattern (a partition of s), so the cost is the number
    of partitions of s rather than C(|S|+s-1, s).
    """
    k = S if isinstance(S, Integral) else len(set(S))
    if s < 1:
        raise DomainError("s must be >= 1")
    total = 0
    for parts in _partitions(s):
        r = len(parts)
        if r > k:
            continue
        shapes = math.factorial(r) // math.prod(math.factorial(c) for c in Counter(parts).values())
        multisets = math.comb(k, r) * shapes
        perm = math.factorial(s) // math.prod(math.factorial(p) for p in parts)
        total += multisets * perm * perm
    return total


def power_sums(xs: Sequence, n: int) -> tuple:
    return tuple(sum(x**j for x in xs) for j in range(1, n + 1))


def newton_girard_elementary(p: Sequence) -> tuple[Fraction, ...]:
    """Elementary symmetric S_1..S_n from power sums p_1..p_n.

    j S_j = sum_{i=1}^j (-1)^(i-1) S_{j-i} p_i with S_0 = 1.
    """
    S = [Fraction(1)]
    for j in range(1, len(p) + 1):
        acc = Fraction(0)
        for i in range(1, j + 1):
            acc += (-1) ** (i - 1) * S[j - i] * Fraction(p[i - 1])
        S.append(acc / j)
    return tuple(S[1:])


def certify_diagonal(x: Sequence[int], n: int) -> bool:
    """Decide whether a solution of the degree-n moment system is diagonal.

    Computed twice: by sorting the halves and by comparing the elementary
    symmetric functions of the halves (via Newton-Girard); the two answers
    must agree.
    """
    if len(x) % 2:
        raise DomainError("tuple length must be even")
    s = len(x) // 2
    left, right = list(x[:s]), list(x[s:])
    if power_sums(left, n) != power_sums(right, n):
        raise DomainError(f"{tuple(x)} does not solve the degree-{n} system")
    by_sort = sorted(left) == sorted(right)
    by_symmetric = newton_girard_elementary(power_sums(left, s)) == newton_girard_elementary(
        power_sums(right, s)
    )
    if by_sort != by_symmetric:
        raise InvariantViolation(f"sorted and symmetric-function tests disagree on {tuple(x)}")
    return by_sort


# ---------------------------------------------------------------------------
# brute force
# ---------------------------------------------------------------------------

def count_solutions_bruteforce(
    phi: PhiMap, S: Iterable[int], s: int, budget: int = BRUTEFORCE_BUDGET
) -> SolutionTally:
    """Enumerate all of S^(2s) as (first half, second half) pairs."""
    t0 = time.perf_counter()
    S = phi.check_subset(S)
    if s < 1:
        raise DomainError("s must be >= 1")
    k = len(S)
    required = k ** (2 * s)
    if required > budget:
        raise BudgetExceeded("brute-force enumeration", required, budget)
    if k == 0:
        return SolutionTally(phi.n, s, S, 0, 0, "bruteforce", 0.0)

    biggest = max(abs(c) for j in S for c in phi(j))
    if s * biggest < _INT64_SAFE:
        J, diag = _bruteforce_numpy(phi, S, s)
    else:
        J, diag = _bruteforce_python(phi, S, s)
    return SolutionTally(phi.n, s, S, J, diag, "bruteforce", (time.perf_counter() - t0) * 1e3)


def _bruteforce_numpy(phi: PhiMap, S, s) -> tuple[int, int]:
    k, n = len(S), phi.n
    vals = np.array([phi(j) for j in S], dtype=np.int64)
    idx = np.indices((k,) * s).reshape(s, -1).T
    sums = vals[idx].sum(axis=1)
    _, multiset_id = np.unique(np.sort(idx, axis=1), axis=0, return_inverse=True)
    multiset_id = multiset_id.ravel()
    M = len(sums)
    cols = [np.ascontiguousarray(sums[:, c]) for c in range(n)]
    block = max(1, 4_000_000 // M)
    J = diag = 0
    for start in range(0, M, block):
        stop = min(M, start + block)
        eq = cols[0][start:stop, None] == cols[0][None, :]
        for c in range(1, n):
            eq &= cols[c][start:stop, None] == cols[c][None, :]
        J += int(eq.sum())
        eq &= multiset_id[start:stop, None] == multiset_id[None, :]
        diag += int(eq.sum())
    return J, diag


def _bruteforce_python(phi: PhiMap, S, s) -> tuple[int, int]:
    from itertools import product

    halves = [(t, tuple(map(sum, zip(*(phi(j) for j in t))))) for t in product(S, repeat=s)]
    J = diag = 0
    for a, va in halves:
        sa = sorted(a)
        for b, vb in halves:
            if va == vb:
                J += 1
                diag += sa == sorted(b)
    return J, diag


# ---------------------------------------------------------------------------
# sum tables
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class _KeyCodec:
    """Mixed-radix integer encoding of s-fold sum vectors.

    Coordinate k of a sum of s values lies in [s*lo_k, s*hi_k]; digit k is
    v_k - s*lo_k with radix s*(hi_k - lo_k) + 1, so the encoding is linear
    and injective on s-fold sums.
    """

    lo: tuple[int, ...]
    radices: tuple[int, ...]
    s: int
    capacity: int

    @classmethod
    def for_values(cls, vals: Sequence[Sequence[int]], s: int) -> "_KeyCodec":
        n = len(vals[0])
        lo = tuple(min(v[c] for v in vals) for c in range(n))
        hi = tuple(max(v[c] for v in vals) for c in range(n))
        radices, r = [], 1
        for c in range(n):
            radices.append(r)
            r *= s * (hi[c] - lo[c]) + 1
        return cls(lo, tuple(radices), s, r)

    def encode_single(self, v: Sequence[int]) -> int:
        return sum((v[c] - self.lo[c]) * self.radices[c] for c in range(len(v)))

    def decode(self, key: int, terms: int) -> tuple[int, ...]:
        out = []
        for c in reversed(range(len(self.lo))):
            d, key = divmod(key, self.radices[c])
            out.append(d + terms * self.lo[c])
        return tuple(reversed(out))


@dataclass(frozen=True)
class WeightedSumTable:
    """W(v) = sum over s-tuples (j_1..j_s) with phi(j_1)+...+phi(j_s) = v of a_j1...a_js."""

    s: int
    keys: np.ndarray
    weights: np.ndarray
    source: str
    codec: _KeyCodec = field(repr=False)

    def __len__(self) -> int:
        return len(self.keys)

    def items(self):
        for k, w in zip(self.keys.tolist(), self.weights.tolist()):
            yield self.codec.decode(int(k), self.s), w

    def total(self):
        if self.source == "float":
            return complex(np.sum(self.weights))
        return sum(self.weights.tolist())

    def moment(self):
        """sum_v |W(v)|^2, exact for integer and rational weights."""
        w = self.weights
        if self.source == "float":
            return float(np.sum(w.real * w.real + w.imag * w.imag))
        if w.dtype != object:
            peak = int(np.abs(w).max()) if len(w) else 0
            if peak * peak * max(1, len(w)) < 2**63:
                return int(np.dot(w, w))
        return sum(x * x for x in w.tolist())


def _classify_weights(a: Sequence) -> str:
    vals = list(a)
    if all(isinstance(x, (Integral, bool)) or (isinstance(x, np.integer)) for x in vals):
        return "integer"
    if all(isinstance(x, (Rational, np.integer)) for x in vals):
        return "exact"
    return "float"


def _reduce(keys: np.ndarray, weights: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    order = np.argsort(keys, kind="stable")
    ks = keys[order]
    ws = weights[order]
    if len(ks) == 0:
        return ks, ws
    starts = np.flatnonzero(np.concatenate(([True], ks[1:] != ks[:-1])))
    return ks[starts], np.add.reduceat(ws, starts)


def _table_requirement(k: int, s: int, spans: Sequence[int]) -> int:
    need = 0
    for stage in range(1, s):
        distinct = math.prod(stage * sp + 1 for sp in spans)
        need = max(need, min(k**stage, distinct) * k)
    return need


def build_sum_table(
    phi: PhiMap,
    a: Sequence | None,
    s: int,
    *,
    subset: Iterable[int] | None = None,
    budget: int = TABLE_BUDGET,
    workers: int = 1,
) -> WeightedSumTable:
    """s-fold convolution of the weights a_j placed at phi(j).

    ``a=None`` with ``subset`` gives indicator weights on the subset.  The
    last stage is split across ``workers`` private tables which are merged
    in a fixed order, so results only depend on the worker count.
    """
    if s < 1:
        raise DomainError("s must be >= 1")
    if a is None:
        S = phi.check_subset(subset if subset is not None else range(1, phi.N + 1))
        idx = list(S)
        wvals: list = [1] * len(S)
        source = "indicator"
    else:
        if len(a) != phi.N:
            raise DomainError(f"coefficient vector has length {len(a)}, phi has N={phi.N}")
        idx = list(range(1, phi.N + 1))
        wvals = list(a)
        source = {"integer": "exact", "exact": "exact", "float": "float"}[_classify_weights(wvals)]
    if not idx:
        raise DomainError("empty support")
    vals = [phi(j) for j in idx]
    codec = _KeyCodec.for_values(vals, s)
    spans = [max(v[c] for v in vals) - min(v[c] for v in vals) for c in range(phi.n)]
    required = _table_requirement(len(idx), s, spans)
    if required > budget:
        raise BudgetExceeded("sum table", required, budget)

    single = [codec.encode_single(v) for v in vals]
    if source == "float":
        w1 = np.asarray(wvals, dtype=complex)
    elif source == "indicator" or _classify_weights(wvals) == "integer":
        bound = sum(abs(int(x)) for x in wvals) ** s
        w1 = np.asarray([int(x) for x in wvals], dtype=np.int64 if bound < _INT64_SAFE else object)
    else:
        w1 = np.asarray([Fraction(x) for x in wvals], dtype=object)
    if codec.capacity < _INT64_SAFE:
        k1 = np.asarray(single, dtype=np.int64)
    else:
        k1 = np.asarray(single, dtype=object)

    keys, weights = _reduce(k1, w1)
    for stage in range(2, s + 1):
        if stage == s and workers > 1:
            keys, weights = _parallel_stage(keys, weights, k1, w1, workers)
        else:
            keys, weights = _reduce(
                (keys[:, None] + k1[None, :]).ravel(), (weights[:, None] * w1[None, :]).ravel()
            )
    return WeightedSumTable(s, keys, weights, source, codec)


def _parallel_stage(keys, weights, k1, w1, workers):
    chunks = [c for c in np.array_split(np.arange(len(k1)), workers) if len(c)]

    def part(c):
        return _reduce((keys[:, None] + k1[None, c]).ravel(), (weights[:, None] * w1[None, c]).ravel())

    with ThreadPoolExecutor(max_workers=workers) as pool:
        parts = list(pool.map(part, chunks))
    return _reduce(np.concatenate([p[0] for p in parts]), np.concatenate([p[1] for p in parts]))


def count_solutions_mitm(
    phi: PhiMap, S: Iterable[int], s: int, budget: int = TABLE_BUDGET, workers: int = 1
) -> SolutionTally:
    t0 = time.perf_counter()
    S = phi.check_subset(S)
    if not S:
        return SolutionTally(phi.n, s, S, 0, 0, "mitm", 0.0)
    table = build_sum_table(phi, None, s, subset=S, budget=budget, workers=workers)
    J = table.moment()
    return SolutionTally(phi.n, s, S, J, diagonal_count(len(S), s), "mitm", (time.perf_counter() - t0) * 1e3)


def count_solutions(phi: PhiMap, S: Iterable[int], s: int, engine: str = "auto", **kw) -> SolutionTally:
    """Dispatch to an engine; ``auto`` uses brute force only when |S|^(2s) <= 10^6."""
    S = phi.check_subset(S)
    if engine == "auto":
        engine = "bruteforce" if len(S) ** (2 * s) <= AUTO_BRUTEFORCE_LIMIT else "mitm"
    if engine == "bruteforce":
        return count_solutions_bruteforce(phi, S, s, **kw)
    if engine == "mitm":
        return count_solutions_mitm(phi, S, s, **kw)
    raise DomainError(f"unknown engine {engine!r}")


def weighted_moment(phi: PhiMap, a: Sequence, s: int, budget: int = TABLE_BUDGET, workers: int = 1):
    """Integral over [0,1]^n of |sum_j a_j e(phi(j).alpha)|^(2s), computed as sum_v |W_s(v)|^2.

    Returns an ``int`` for integer coefficients, a ``Fraction`` for rational
    ones and a ``float`` otherwise.
    """
    entries = getattr(a, "entries", a)
    return build_sum_table(phi, entries, s, budget=budget, workers=workers).moment()


def verify_diagonal_only(n: int, s: int, X: int, engine: str = "mitm", **kw) -> bool:
    """True iff J_{s,n}(X) equals the diagonal count exactly."""
    phi = PhiMap.moment_powers(X, n)
    tally = count_solutions(phi, range(1, X + 1), s, engine=engine, **kw)
    return tally.J == diagonal_count(X, s)
