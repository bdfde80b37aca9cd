"""Polynomial curves on [0, 1] and the determinant machinery around them.

Every supported curve is polynomial, so each kind is stored as an exact
rational coefficient table and differentiated exactly.  Floating point
enters only when a derivative is evaluated at a float parameter.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import TYPE_CHECKING, Callable, Sequence

import numpy as np

from .errors import (
    ConfigurationError,
    ContractViolation,
    ConvergenceError,
    DomainError,
)
from .quadrature import composite_rule, panel_breaks

if TYPE_CHECKING:
    from .intervals import Decomposition

KINDS = ("normalized-moment", "standard-moment", "polynomial")
MAX_DIMENSION = 8


def _as_fraction(v) -> Fraction:
    if isinstance(v, float):
        return Fraction(v).limit_denominator(10**12)
    return Fraction(v)


@dataclass(frozen=True)
class Curve:
    """A polynomial curve gamma: [0, 1] -> R^n.

    ``coefficients[i][k]`` is the coefficient of t**k in coordinate i.
    Use the ``normalized_moment``, ``standard_moment`` and ``polynomial``
    constructors rather than building the table by hand.
    """

    n: int
    kind: str
    coefficients: tuple[tuple[Fraction, ...], ...]

    def __post_init__(self):
        if not 1 <= self.n <= MAX_DIMENSION:
            raise DomainError(f"dimension must be in [1, {MAX_DIMENSION}], got {self.n}")
        if self.kind not in KINDS:
            raise DomainError(f"unknown curve kind {self.kind!r}")
        if len(self.coefficients) != self.n:
            raise DomainError("coefficient table must have one row per coordinate")

    @classmethod
    def normalized_moment(cls, n: int) -> "Curve":
        """(t, t^2/2, ..., t^n/n)."""
        rows = tuple(
            tuple(Fraction(1, i + 1) if k == i + 1 else Fraction(0) for k in range(n + 1))
            for i in range(n)
        )
        return cls(n, "normalized-moment", rows)

    @classmethod
    def standard_moment(cls, n: int) -> "Curve":
        """(t, t^2, ..., t^n)."""
        rows = tuple(
            tuple(Fraction(1) if k == i + 1 else Fraction(0) for k in range(n + 1))
            for i in range(n)
        )
        return cls(n, "standard-moment", rows)

    @classmethod
    def polynomial(cls, rows: Sequence[Sequence]) -> "Curve":
        width = max(len(r) for r in rows)
        table = tuple(
            tuple(_as_fraction(c) for c in r) + (Fraction(0),) * (width - len(r)) for r in rows
        )
        return cls(len(table), "polynomial", table)

    @property
    def degree(self) -> int:
        return len(self.coefficients[0]) - 1

    def derivative_table(self, order: int) -> tuple[tuple[Fraction, ...], ...]:
        return _derivative_table(self.coefficients, order)

    def derivative(self, order: int, t) -> np.ndarray:
        """Vectorized gamma^(order)(t); result has shape ``np.shape(t) + (n,)``.

        No domain checks (see :func:`eval_derivative` for the checked form).
        """
        table = _float_table(self.coefficients, order)
        t = np.asarray(t, dtype=float)
        powers = t[..., None] ** np.arange(table.shape[1])
        return powers @ table.T

    def exact_point(self, t: Fraction, order: int = 0) -> tuple[Fraction, ...]:
        """gamma^(order)(t) in exact rational arithmetic."""
        out = []
        for row in self.derivative_table(order):
            acc = Fraction(0)
            for c in reversed(row):
                acc = acc * t + c
            out.append(acc)
        return tuple(out)

    def wronskian(self, t) -> np.ndarray:
        """det(gamma'(t), ..., gamma^(n)(t)), vectorized over t."""
        t = np.asarray(t, dtype=float)
        cols = [self.derivative(k, t) for k in range(1, self.n + 1)]
        return np.linalg.det(np.stack(cols, axis=-1))

    def speed_bounds(self) -> np.ndarray:
        """Per-coordinate upper bounds for |gamma_k'| on [0, 1] (sum of |coefficients|)."""
        return np.array([sum(abs(float(c)) for c in row) for row in self.derivative_table(1)])

    def describe(self) -> dict:
        d = {"kind": self.kind, "n": self.n}
        if self.kind == "polynomial":
            d["coefficients"] = [[str(c) for c in row] for row in self.coefficients]
        return d


@lru_cache(maxsize=256)
def _derivative_table(coeffs, order):
    rows = []
    for row in coeffs:
        r = list(row)
        for _ in range(order):
            r = [k * r[k] for k in range(1, len(r))] or [Fraction(0)]
        rows.append(tuple(r) if r else (Fraction(0),))
    return tuple(rows)


@lru_cache(maxsize=256)
def _float_table(coeffs, order) -> np.ndarray:
    t = np.array([[float(c) for c in row] for row in _derivative_table(coeffs, order)])
    t.flags.writeable = False
    return t


def parse_curve(text: str) -> Curve:
    """Parse the plain-text curve format.

    Lines are ``kind <name>``, ``n <int>`` and, for polynomial curves, one
    ``coeffs c0 c1 ...`` line per coordinate with rationals written ``p/q``.
    ``#`` starts a comment.
    """
    kind, n, rows = None, None, []
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, *vals = line.split()
        if key == "kind":
            kind = vals[0]
        elif key == "n":
            n = int(vals[0])
        elif key == "coeffs":
            rows.append([Fraction(v) for v in vals])
        else:
            raise ConfigurationError(f"unknown curve config key {key!r}")
    if kind == "normalized-moment":
        return Curve.normalized_moment(n)
    if kind == "standard-moment":
        return Curve.standard_moment(n)
    if kind == "polynomial":
        curve = Curve.polynomial(rows)
        if n is not None and n != curve.n:
            raise ConfigurationError(f"n={n} but {curve.n} coefficient rows given")
        return curve
    raise ConfigurationError(f"unknown or missing curve kind {kind!r}")


def load_curve(path) -> Curve:
    with open(path) as fh:
        return parse_curve(fh.read())


def eval_derivative(curve: Curve, order: int, t: float) -> np.ndarray:
    if not 0 <= order <= curve.n:
        raise DomainError(f"derivative order must be in [0, {curve.n}], got {order}")
    if not 0.0 <= t <= 1.0:
        raise DomainError(f"parameter t={t} outside [0, 1]")
    return curve.derivative(order, t)


def is_nondegenerate(curve: Curve, samples: int = 1000) -> bool:
    w = curve.wronskian(np.linspace(0.0, 1.0, samples))
    return bool(np.all(w != 0.0))


def vandermonde(u) -> np.ndarray:
    """prod_{i<j} (u_j - u_i) along the last axis."""
    u = np.asarray(u, dtype=float)
    n = u.shape[-1]
    out = np.ones(u.shape[:-1])
    for i in range(n):
        for j in range(i + 1, n):
            out = out * (u[..., j] - u[..., i])
    return out


def _first_derivative_matrices(curve: Curve, u: np.ndarray) -> np.ndarray:
    # columns are gamma'(u_j)
    return np.swapaxes(curve.derivative(1, u), -1, -2)


def exact_det(rows: Sequence[Sequence[Fraction]]) -> Fraction:
    """Determinant by Gaussian elimination over the rationals."""
    a = [list(r) for r in rows]
    n = len(a)
    det = Fraction(1)
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != col:
            a[col], a[piv] = a[piv], a[col]
            det = -det
        p = a[col][col]
        det *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                for k in range(col, n):
                    a[r][k] -= f * a[col][k]
    return det


def derivative_columns_det(curve: Curve, u: Sequence[float], order: int = 1) -> float:
    """det(gamma^(order)(u_1), ..., gamma^(order)(u_n)), exact then rounded.

    Float parameters are exact rationals, so the only rounding is the final
    conversion; LU elimination loses ~1e-7 relative accuracy at n = 6.
    """
    cols = [curve.exact_point(Fraction(float(x)), order) for x in u]
    return float(exact_det([[cols[j][i] for j in range(len(cols))] for i in range(curve.n)]))


def first_derivative_det(curve: Curve, u: Sequence[float]) -> float:
    """det(gamma'(u_1), ..., gamma'(u_n)) for strictly increasing u in [0, 1]."""
    u = np.asarray(u, dtype=float)
    if u.shape != (curve.n,):
        raise DomainError(f"expected {curve.n} parameters, got shape {u.shape}")
    if np.any(np.diff(u) <= 0):
        raise DomainError("parameters must be strictly increasing")
    if u[0] < 0.0 or u[-1] > 1.0:
        raise DomainError("parameters must lie in [0, 1]")
    return derivative_columns_det(curve, u)


@dataclass(frozen=True)
class DetRatioScan:
    ratio_min: float
    ratio_max: float
    argmin: tuple[float, ...]
    argmax: tuple[float, ...]
    samples: int
    skipped: int
    seed: int
    delta: float

    def to_dict(self) -> dict:
        return {
            "ratio_min": self.ratio_min,
            "ratio_max": self.ratio_max,
            "argmin": list(self.argmin),
            "argmax": list(self.argmax),
            "samples": self.samples,
            "skipped": self.skipped,
            "seed": self.seed,
            "delta": self.delta,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def det_ratio_scan(curve: Curve, delta: float, samples: int, seed: int = 0) -> DetRatioScan:
    """Extremes of |det(gamma'(u))| / Vandermonde(u) over random increasing tuples.

    Tuples live in a window [a, a + delta] with a uniform in [0, 1 - delta].
    Tuples whose Vandermonde product rounds to zero are skipped and counted.
    """
    if not 0.0 < delta <= 1.0:
        raise DomainError(f"delta must be in (0, 1], got {delta}")
    rng = np.random.default_rng(seed)
    start = rng.uniform(0.0, 1.0 - delta, size=(samples, 1))
    u = np.sort(start + delta * rng.uniform(size=(samples, curve.n)), axis=1)
    vdm = vandermonde(u)
    ok = vdm > 0.0
    dets = np.abs(np.linalg.det(_first_derivative_matrices(curve, u[ok])))
    ratios = dets / vdm[ok]
    if ratios.size == 0:
        raise DomainError("every sampled tuple was degenerate")
    kmin, kmax = int(np.argmin(ratios)), int(np.argmax(ratios))
    good = u[ok]
    return DetRatioScan(
        ratio_min=float(ratios[kmin]),
        ratio_max=float(ratios[kmax]),
        argmin=tuple(float(v) for v in good[kmin]),
        argmax=tuple(float(v) for v in good[kmax]),
        samples=samples,
        skipped=int(samples - ok.sum()),
        seed=seed,
        delta=delta,
    )


# ---------------------------------------------------------------------------
# averaged matrix and the small-image exclusion
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class AveragedMatrix:
    """Column j is the integral over J_j of gamma' weighted by |Xi|."""

    entries: np.ndarray
    intervals: tuple[tuple[Fraction, Fraction], ...]
    exact: tuple[tuple[Fraction, ...], ...] = field(repr=False)

    @property
    def n(self) -> int:
        return self.entries.shape[0]

    def det(self) -> float:
        return float(np.linalg.det(self.entries))


def _check_essentially_disjoint(intervals) -> None:
    ordered = sorted(intervals)
    for (a0, b0), (a1, b1) in zip(ordered, ordered[1:]):
        if a1 < b0:
            raise ContractViolation(f"intervals [{a0}, {b0}] and [{a1}, {b1}] overlap")


def averaged_matrix(curve: Curve, decomposition: "Decomposition") -> AveragedMatrix:
    """Exact piecewise integration: on a piece where |Xi| = v the integral of
    gamma' is v * (gamma(b) - gamma(a))."""
    intervals = tuple(decomposition.intervals)
    if len(intervals) != curve.n:
        raise ContractViolation(
            f"need exactly n={curve.n} intervals, decomposition has {len(intervals)}"
        )
    _check_essentially_disjoint(intervals)
    pieces = list(decomposition.xi.pieces())
    columns = []
    for lo, hi in intervals:
        col = [Fraction(0)] * curve.n
        for a, b, v in pieces:
            a, b = max(a, lo), min(b, hi)
            if a >= b or v == 0:
                continue
            ga, gb = curve.exact_point(Fraction(a)), curve.exact_point(Fraction(b))
            for k in range(curve.n):
                col[k] += abs(v) * (gb[k] - ga[k])
        columns.append(tuple(col))
    exact = tuple(tuple(columns[j][i] for j in range(curve.n)) for i in range(curve.n))
    entries = np.array([[float(x) for x in row] for row in exact])
    return AveragedMatrix(entries, intervals, exact)


@dataclass(frozen=True)
class SmallImageReport:
    min_norm: float
    threshold: float
    passed: bool
    hypotheses_met: bool
    anomaly: bool
    det: float
    predicted_scale: float
    vectors_tested: int


def _center(iv) -> float:
    return float(iv[0] + iv[1]) / 2


def small_image_excluded(
    curve: Curve,
    A: AveragedMatrix,
    R: float,
    j0: int,
    *,
    c1: float = 10.0,
    delta0: float = 1.0,
    random_vectors: int = 1000,
    seed: int = 0,
) -> SmallImageReport:
    """Test |Av| >= R^-n over sign vectors and random v with |v_j0| >= 1.

    ``j0`` is a 0-based column index.  Whether the length/diameter
    hypotheses hold is reported rather than enforced, so negative controls
    can be run through the same code path.
    """
    n = A.n
    if R < 1:
        raise DomainError("R must be >= 1")
    if not 0 <= j0 < n:
        raise DomainError(f"j0 must be in [0, {n})")
    lengths = [float(b - a) for a, b in A.intervals]
    centers = sorted(_center(iv) for iv in A.intervals)
    diam = float(max(b for _, b in A.intervals) - min(a for a, _ in A.intervals))
    hypotheses = lengths[j0] >= c1 / R and diam <= delta0

    scale = math.prod(lengths) * math.prod(
        centers[j] - centers[i] for i in range(n) for j in range(i + 1, n)
    )
    det = A.det()
    anomaly = abs(det) < 1e-14 * scale

    signs = np.array(list(product((-1.0, 1.0), repeat=n)))
    rng = np.random.default_rng(seed)
    rand = rng.uniform(-n, n, size=(random_vectors, n))
    rand[:, j0] = rng.choice((-1.0, 1.0), size=random_vectors) * rng.uniform(1.0, n, size=random_vectors)
    vs = np.vstack([signs, rand])
    norms = np.linalg.norm(vs @ A.entries.T, axis=1)
    threshold = float(R) ** (-n)
    mn = float(norms.min())
    return SmallImageReport(
        min_norm=mn,
        threshold=threshold,
        passed=mn >= threshold,
        hypotheses_met=hypotheses,
        anomaly=anomaly,
        det=det,
        predicted_scale=scale,
        vectors_tested=len(vs),
    )


def calibrate_constant(passes: Callable[[float], bool], start: float, limit: float) -> float:
    """Double ``start`` until ``passes`` accepts it; give up beyond ``limit``."""
    value = start
    while value <= limit:
        if passes(value):
            return value
        value *= 2
    raise ConfigurationError(f"no constant <= {limit} passed (started at {start})")


# ---------------------------------------------------------------------------
# the recursive measure sigma
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class SigmaSpec:
    knots: tuple[float, ...]

    def __post_init__(self):
        if len(self.knots) < 1:
            raise DomainError("sigma needs at least one knot")
        if any(b <= a for a, b in zip(self.knots, self.knots[1:])):
            raise DomainError("knots must be strictly increasing")

    @property
    def m(self) -> int:
        return len(self.knots)


def sigma_constant(m: int) -> Fraction:
    """c_m = 1 / prod_{j=1}^m (j-1)!."""
    return Fraction(1, math.prod(math.factorial(j - 1) for j in range(1, m + 1)))


def sigma_rule(knots, q: int = 6, panels: int = 1) -> tuple[np.ndarray, np.ndarray]:
    """Quadrature nodes and weights representing sigma_{t_1..t_m}.

    ``knots`` has shape (B, m); returns points (B, K, m) and weights (B, K).
    The outer integrals over s_k in [t_{k-1}, t_k] use composite Gauss rules
    and the inner measure is expanded recursively.
    """
    knots = np.asarray(knots, dtype=float)
    B, m = knots.shape
    if m == 1:
        return knots[:, None, :], np.ones((B, 1))
    nodes, weights = composite_rule(panel_breaks(knots[:, :-1], knots[:, 1:], panels), q)
    P = nodes.shape[-1]
    idx = np.indices((P,) * (m - 1)).reshape(m - 1, -1).T
    axes = np.arange(m - 1)[None, :]
    s = nodes[:, axes, idx]
    w = np.prod(weights[:, axes, idx], axis=-1)
    G = idx.shape[0]
    inner_pts, inner_w = sigma_rule(s.reshape(B * G, m - 1), q, panels)
    K = inner_pts.shape[1]
    head = np.broadcast_to(knots[:, None, None, :1], (B, G, K, 1))
    pts = np.concatenate([head, inner_pts.reshape(B, G, K, m - 1)], axis=-1)
    return pts.reshape(B, G * K, m), (w[:, :, None] * inner_w.reshape(B, G, K)).reshape(B, G * K)


def sigma_integrate(
    func: Callable[[np.ndarray], np.ndarray],
    knots: Sequence[float],
    *,
    rtol: float = 1e-10,
    q: int = 6,
    max_panels: int = 16,
) -> float:
    """Integrate ``func`` (vectorized over an (K, m) array) against sigma.

    Panels double until two successive levels agree to ``rtol``.
    """
    k = np.asarray(knots, dtype=float)[None, :]
    prev = None
    panels = 1
    while panels <= max_panels:
        pts, w = sigma_rule(k, q, panels)
        val = float(np.sum(func(pts[0]) * w[0]))
        if prev is not None and abs(val - prev) <= rtol * abs(val) + 1e-300:
            return val
        prev = val
        panels *= 2
    raise ConvergenceError(f"sigma quadrature did not reach rtol={rtol}", prev)


def sigma_mass(spec: SigmaSpec, mode: str = "closed-form") -> float:
    m = spec.m
    if mode == "closed-form":
        t = spec.knots
        return float(sigma_constant(m)) * math.prod(
            t[j] - t[i] for i in range(m) for j in range(i + 1, m)
        )
    if mode == "recursive-quadrature":
        if m > 4:
            raise DomainError(f"recursive quadrature supports m <= 4, got m={m}")
        return sigma_integrate(lambda pts: np.ones(len(pts)), spec.knots, q=4 if m == 4 else 6)
    raise DomainError(f"unknown mode {mode!r}")


def multilinear_identity_check(curve: Curve, t: Sequence[float], m: int, rtol: float = 1e-10) -> float:
    """Relative residual of the sigma representation of det(h(t_1), ..., h(t_m)).

    h is gamma' restricted to its first m coordinates and the alternating
    form is the m x m determinant.
    """
    if not 1 <= m <= min(curve.n, 3):
        raise DomainError(f"m must be in [1, min(n, 3)], got {m}")
    spec = SigmaSpec(tuple(float(v) for v in t))
    if spec.m != m:
        raise DomainError(f"expected {m} knots, got {spec.m}")
    knots = np.asarray(spec.knots)
    lhs = float(np.linalg.det(curve.derivative(1, knots)[:, :m].T))

    def integrand(pts):
        cols = [curve.derivative(k + 1, pts[:, k])[:, :m] for k in range(m)]
        return np.linalg.det(np.stack(cols, axis=-1))

    rhs = sigma_integrate(integrand, knots, rtol=rtol)
    return abs(lhs - rhs) / (abs(lhs) + 1e-300)
