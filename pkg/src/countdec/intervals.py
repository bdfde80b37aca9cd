"""Signed interval sums, their sign-constant decomposition, and the separation harness.

For pairs (s_i, t_i) the step function Xi = sum_i chi_[s_i, t_i) satisfies
sum_i (gamma(t_i) - gamma(s_i)) = integral of gamma' Xi.  Everything except
the final evaluation of gamma is done in exact rational arithmetic.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterator, Sequence

import numpy as np

from .curves import Curve, calibrate_constant
from .errors import ConfigurationError, ContractViolation, DomainError, InvariantViolation

RESAMPLE_CAP = 10**6


def _rational(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12) if not v.is_integer() else Fraction(int(v))
    return Fraction(v)


@dataclass(frozen=True)
class StepFunction:
    """Integer-valued, right-continuous, zero outside [breaks[0], breaks[-1]).

    ``values[k]`` is the value on [breaks[k], breaks[k+1]).  Adjacent equal
    values are merged and zero pieces at either end are trimmed, so two
    equal functions have equal representations.
    """

    breaks: tuple[Fraction, ...]
    values: tuple[int, ...]

    def __post_init__(self):
        b, v = list(self.breaks), list(self.values)
        if b and len(v) != len(b) - 1:
            raise DomainError("need one value per piece")
        if any(x >= y for x, y in zip(b, b[1:])):
            raise DomainError("breakpoints must be strictly increasing")
        mb, mv = b[:1], []
        for k, val in enumerate(v):
            if mv and mv[-1] == val:
                mb[-1] = b[k + 1]
            else:
                mv.append(val)
                mb.append(b[k + 1])
        while mv and mv[0] == 0:
            mv.pop(0)
            mb.pop(0)
        while mv and mv[-1] == 0:
            mv.pop()
            mb.pop()
        if not mv:
            mb = []
        object.__setattr__(self, "breaks", tuple(mb))
        object.__setattr__(self, "values", tuple(mv))

    @classmethod
    def zero(cls) -> "StepFunction":
        return cls((), ())

    def is_zero(self) -> bool:
        return not self.values

    def pieces(self) -> Iterator[tuple[Fraction, Fraction, int]]:
        for k, v in enumerate(self.values):
            yield self.breaks[k], self.breaks[k + 1], v

    def __call__(self, t) -> int:
        b = self.breaks
        if not b or t < b[0] or t >= b[-1]:
            return 0
        lo, hi = 0, len(b) - 1
        while hi - lo > 1:
            mid = (lo + hi) // 2
            if b[mid] <= t:
                lo = mid
            else:
                hi = mid
        return self.values[lo]

    def sup_abs(self) -> int:
        return max((abs(v) for v in self.values), default=0)


@dataclass(frozen=True)
class Dissection:
    """Indices into the dissection {R^-1 [l, l+1] : 0 <= l < R}."""

    R: int
    I: tuple[int, ...]
    I_prime: tuple[int, ...]
    c0: float
    delta0: float

    def is_permutation(self) -> bool:
        return sorted(self.I) == sorted(self.I_prime)


@dataclass(frozen=True)
class SignedIntervalFamily:
    pairs: tuple[tuple[Fraction, Fraction], ...]
    dissection: Dissection | None = field(default=None, compare=False)

    def __post_init__(self):
        pairs = tuple((_rational(s), _rational(t)) for s, t in self.pairs)
        for s, t in pairs:
            if not (0 <= s <= 1 and 0 <= t <= 1):
                raise DomainError(f"endpoint pair ({s}, {t}) outside [0, 1]")
        object.__setattr__(self, "pairs", pairs)

    @property
    def n(self) -> int:
        return len(self.pairs)


def parse_family(text: str) -> SignedIntervalFamily:
    """One ``s_i t_i`` pair of rationals (e.g. ``1/3 0.5``) per line; ``#`` starts a comment."""
    pairs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 2:
            raise DomainError(f"line {lineno}: expected two endpoints, got {len(parts)}")
        try:
            pairs.append((Fraction(parts[0]), Fraction(parts[1])))
        except ValueError as exc:
            raise DomainError(f"line {lineno}: {exc}") from None
    return SignedIntervalFamily(tuple(pairs))


def _signed_sweep(pairs) -> StepFunction:
    # chi_[a,b) is +1 on [a,b) for a <= b and -1 on [b,a) otherwise; both are
    # +1 at a and -1 at b in the sweep.
    delta: dict = {}
    for a, b in pairs:
        if a == b:
            continue
        delta[a] = delta.get(a, 0) + 1
        delta[b] = delta.get(b, 0) - 1
    points = sorted(delta)
    values, run = [], 0
    for p in points[:-1]:
        run += delta[p]
        values.append(run)
    return StepFunction(tuple(points), tuple(values))


def build_xi(family: SignedIntervalFamily) -> StepFunction:
    return _signed_sweep(family.pairs)


@dataclass(frozen=True)
class Decomposition:
    intervals: tuple[tuple[Fraction, Fraction], ...]
    signs: tuple[int, ...]
    xi: StepFunction = field(repr=False)
    padded: bool = False
    family: SignedIntervalFamily | None = field(default=None, repr=False, compare=False)

    @property
    def ell(self) -> int:
        return len(self.intervals)

    def lengths(self) -> tuple[Fraction, ...]:
        return tuple(b - a for a, b in self.intervals)


def decompose_support(xi: StepFunction, n: int, family: SignedIntervalFamily | None = None) -> Decomposition:
    """Maximal closed intervals on whose interior Xi has one sign, ordered left to right."""
    intervals, signs = [], []
    for a, b, v in xi.pieces():
        if v == 0:
            continue
        sg = 1 if v > 0 else -1
        if intervals and signs[-1] == sg and intervals[-1][1] == a:
            intervals[-1] = (intervals[-1][0], b)
        else:
            intervals.append((a, b))
            signs.append(sg)
    if len(intervals) > n:
        raise InvariantViolation(f"{len(intervals)} sign-constant components exceed n = {n}")
    if xi.sup_abs() > n:
        raise InvariantViolation(f"|Xi| reaches {xi.sup_abs()} > n = {n}")
    return Decomposition(tuple(intervals), tuple(signs), xi, False, family)


def sign_decomposition(family: SignedIntervalFamily) -> Decomposition:
    return decompose_support(build_xi(family), family.n, family)


def long_component_exists(d: Decomposition, R: float, c0: float) -> bool:
    """Some component has length >= c0 / R."""
    return any(L * Fraction(R) >= _rational(c0) for L in d.lengths())


def pad_to_n(d: Decomposition, n: int, R: float | None = None, c0: float | None = None) -> Decomposition:
    """Split the longest component into n - l + 1 equal closed pieces.

    When the family carries dissection metadata and its tuples are not
    permutations of each other, the padded decomposition must contain a
    piece of length >= (c0/n)/R; a failure raises InvariantViolation.
    """
    ell = d.ell
    if ell > n:
        raise ContractViolation(f"decomposition has {ell} > n = {n} intervals")
    diss = d.family.dissection if d.family is not None else None
    R = R if R is not None else (diss.R if diss else None)
    c0 = c0 if c0 is not None else (diss.c0 if diss else None)
    nonperm = diss is not None and not diss.is_permutation()
    if ell == 0:
        if nonperm:
            raise InvariantViolation("Xi vanishes although the interval tuples are not permutations")
        raise ContractViolation("cannot pad an empty decomposition")
    if ell == n:
        out = d
    else:
        j = max(range(ell), key=lambda k: (d.lengths()[k], -k))
        a, b = d.intervals[j]
        k = n - ell + 1
        pieces = tuple((a + (b - a) * i / k, a + (b - a) * (i + 1) / k) for i in range(k))
        intervals = d.intervals[:j] + pieces + d.intervals[j + 1 :]
        signs = d.signs[:j] + (d.signs[j],) * k + d.signs[j + 1 :]
        out = Decomposition(intervals, signs, d.xi, True, d.family)
    if nonperm and R is not None and c0 is not None:
        if max(out.lengths()) * Fraction(R) * n < _rational(c0):
            raise InvariantViolation(f"no padded interval reaches length (c0/n)/R = {c0}/({n}*{R})")
    return out


def reconstruction_holds(d: Decomposition, n: int) -> bool:
    """Check sum_j eps_j |Xi| 1_{J_j} = Xi and 1 <= |Xi| <= n with the right sign
    on every interior, at all midpoints of the common refinement."""
    grid = sorted(set(d.xi.breaks) | {e for iv in d.intervals for e in iv})
    for a, b in zip(grid, grid[1:]):
        mid = (a + b) / 2
        x = d.xi(mid)
        total = 0
        for (lo, hi), sg in zip(d.intervals, d.signs):
            if lo < mid < hi:
                if not (1 <= abs(x) <= n) or (x > 0) != (sg > 0):
                    return False
                total += sg * abs(x)
        if total != x:
            return False
    return True


@dataclass(frozen=True)
class PermutationVerdict:
    theta_zero: bool
    is_permutation: bool


def theta_permutation_test(x: Sequence, y: Sequence) -> PermutationVerdict:
    """Evaluate Theta = sum chi_[x_i, y_i) at every midpoint of consecutive distinct
    endpoints and one point beyond each extreme; raise if Theta == 0 and
    'y is a permutation of x' disagree."""
    if len(x) != len(y):
        raise DomainError("x and y must have equal length")
    xs, ys = [_rational(v) for v in x], [_rational(v) for v in y]
    pts = sorted(set(xs) | set(ys))
    probes = [(a + b) / 2 for a, b in zip(pts, pts[1:])]
    if pts:
        probes += [pts[0] - 1, pts[-1] + 1]

    def theta(t):
        return sum((a <= t < b) - (b <= t < a) for a, b in zip(xs, ys))

    zero = all(theta(t) == 0 for t in probes)
    perm = sorted(xs) == sorted(ys)
    if zero != perm:
        raise InvariantViolation(f"Theta vanishing ({zero}) disagrees with permutation test ({perm}) for x={x}, y={y}")
    return PermutationVerdict(zero, perm)


# ---------------------------------------------------------------------------
# separation harness
# ---------------------------------------------------------------------------

def collection_limits(R: int, c0: float, delta0: float) -> tuple[int, int, int]:
    """(gap, span, k_max): index gap between members, largest allowed index span,
    and the largest admissible collection size."""
    gap = math.ceil(c0 + 1)  # dist(I, I') = (|l - l'| - 1)/R >= c0/R
    span = min(R - 1, math.floor(delta0 * R + 1e-12) - 1)
    k_max = span // gap + 1 if span >= 0 else 0
    return gap, span, k_max


def sample_collection(rng: np.random.Generator, R: int, c0: float, delta0: float) -> tuple[int, ...]:
    gap, span, k_max = collection_limits(R, c0, delta0)
    if k_max < 2:
        raise ConfigurationError(
            f"no admissible collection with two intervals: need ceil(c0+1) = {gap} <= "
            f"min(R-1, delta0*R-1) = {span} (R={R}, c0={c0}, delta0={delta0})"
        )
    k = int(rng.integers(2, k_max + 1))
    room = span - (k - 1) * gap
    y = np.sort(rng.integers(0, room + 1, size=k))
    idx = y + gap * np.arange(k)
    shift = int(rng.integers(0, R - idx[-1]))
    return tuple(int(v) + shift for v in idx)


def sample_nonpermutation(rng: np.random.Generator, members: Sequence[int], n: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    for _ in range(RESAMPLE_CAP):
        I = tuple(int(v) for v in rng.choice(members, size=n))
        J = tuple(int(v) for v in rng.choice(members, size=n))
        if sorted(I) != sorted(J):
            return I, J
    raise ConfigurationError(f"no non-permutation tuple in {RESAMPLE_CAP} draws")


@dataclass(frozen=True)
class SeparationReport:
    curve: str
    n: int
    R: int
    c0: float
    delta0: float
    trials: int
    min_scaled_gap: float
    violations: int
    long_interval_failures: int
    seed: int
    workers: int
    argmin: dict | None = None

    def to_dict(self) -> dict:
        return dict(self.__dict__)


POINT_RESOLUTION = 2**20


def _harness_chunk(curve: Curve, R: int, c0: float, delta0: float, trials: int, rng, check_decomposition: bool):
    n = curve.n
    D = POINT_RESOLUTION
    best, best_case, violations, long_fail = math.inf, None, 0, 0
    for _ in range(trials):
        members = sample_collection(rng, R, c0, delta0)
        I, Ip = sample_nonpermutation(rng, members, n)
        kt = rng.integers(0, D + 1, size=n)
        ks = rng.integers(0, D + 1, size=n)
        t = (np.array(I) + kt / D) / R
        s = (np.array(Ip) + ks / D) / R
        diff = curve.derivative(0, t).sum(axis=0) - curve.derivative(0, s).sum(axis=0)
        gap = float(R) ** n * float(np.linalg.norm(diff))
        if gap < 1:
            violations += 1
        if gap < best:
            best = gap
            best_case = {"I": list(I), "I_prime": list(Ip), "t": t.tolist(), "s": s.tolist()}
        if check_decomposition:
            pairs = tuple(
                (Fraction(int(Ip[i]) * D + int(ks[i]), R * D), Fraction(int(I[i]) * D + int(kt[i]), R * D))
                for i in range(n)
            )
            fam = SignedIntervalFamily(pairs, Dissection(R, I, Ip, c0, delta0))
            d = sign_decomposition(fam)
            if not long_component_exists(d, R, c0):
                long_fail += 1
            pad_to_n(d, n)
    return best, best_case, violations, long_fail


def separation_harness(
    curve: Curve,
    R: int,
    c0: float,
    delta0: float,
    trials: int,
    seed: int,
    *,
    workers: int = 1,
    check_decomposition: bool = True,
) -> SeparationReport:
    """Sample admissible collections, non-permutation tuples and points; record
    min R^n |sum_i gamma(t_i) - gamma(s_i)| and the number of values below 1.

    Trials are split across workers, worker w drawing from
    ``default_rng([seed, w])``, so results depend on (seed, workers) only.
    """
    if R < 1 or int(R) != R:
        raise DomainError("R must be a positive integer")
    R = int(R)
    collection_limits(R, c0, delta0)
    sample_collection(np.random.default_rng(0), R, c0, delta0)  # feasibility check
    workers = max(1, int(workers))
    shares = [trials // workers + (w < trials % workers) for w in range(workers)]

    def run(w):
        return _harness_chunk(curve, R, c0, delta0, shares[w], np.random.default_rng([seed, w]), check_decomposition)

    if workers == 1:
        parts = [run(0)]
    else:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, range(workers)))
    best, case = math.inf, None
    for b, c, _, _ in parts:
        if b < best:
            best, case = b, c
    return SeparationReport(
        curve=curve.kind,
        n=curve.n,
        R=R,
        c0=c0,
        delta0=delta0,
        trials=trials,
        min_scaled_gap=best,
        violations=sum(p[2] for p in parts),
        long_interval_failures=sum(p[3] for p in parts),
        seed=seed,
        workers=workers,
        argmin=case,
    )


def calibrate_c0(curve: Curve, R: int, delta0: float, trials: int, seed: int, start: float = 10.0, limit: float = 40.0) -> float:
    """Smallest c0 in start * 2^k (up to ``limit``) with zero harness violations."""
    return calibrate_constant(
        lambda c0: separation_harness(curve, R, c0, delta0, trials, seed, check_decomposition=False).violations == 0,
        start,
        limit,
    )


def random_family(rng: np.random.Generator, n: int, denominator: int = 12) -> SignedIntervalFamily:
    """Endpoints k/denominator; small denominators make coincidences and cancellations common."""
    k = rng.integers(0, denominator + 1, size=(n, 2))
    if rng.random() < 0.25:
        k[:, 1] = rng.permutation(k[:, 0])
    return SignedIntervalFamily(tuple((Fraction(int(a), denominator), Fraction(int(b), denominator)) for a, b in k))
