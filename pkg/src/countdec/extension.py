"""Desk-scale probes of the extension operator E_I f(x) = int_I e(x . gamma(t)) f(t) dt.

These are empirical measurements with regression anchors, not proofs.  All
weighted L^p norms are tensor-grid sums over a truncated disc, and every
quantity in one probe shares the same grid, so identities such as
Minkowski's inequality hold up to rounding only.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .curves import Curve
from .errors import AccuracyWarning, BudgetExceeded, ConvergenceError, DomainError, InvariantViolation
from .quadrature import composite_rule

TWO_PI = 2 * math.pi


@dataclass(frozen=True)
class BallWeight:
    """w_B(x) = (1 + |x - x0| / R')^(-E); E defaults to n + 1."""

    center: tuple[float, ...]
    radius: float
    exponent: float | None = None

    def __post_init__(self):
        object.__setattr__(self, "center", tuple(float(c) for c in self.center))
        if not self.radius > 0:
            raise DomainError("ball radius must be positive")
        if self.exponent is None:
            object.__setattr__(self, "exponent", float(self.n + 1))
        if not self.exponent > self.n:
            raise DomainError(f"weight exponent must exceed n = {self.n}")

    @property
    def n(self) -> int:
        return len(self.center)

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        r = np.linalg.norm(x - np.array(self.center), axis=-1)
        return (1.0 + r / self.radius) ** (-self.exponent)

    def truncation_radius(self, threshold: float) -> float:
        """Distance from the center beyond which w_B < threshold."""
        return self.radius * (threshold ** (-1.0 / self.exponent) - 1.0)

    def tail_mass(self, L: float) -> float:
        """Integral of w_B over |x - x0| > L (closed form, n in {1, 2})."""
        E, Rp, a = self.exponent, self.radius, L / self.radius
        if self.n == 1:
            return 2 * Rp * (1 + a) ** (1 - E) / (E - 1)
        if self.n == 2:
            return TWO_PI * Rp**2 * ((1 + a) ** (2 - E) / (E - 2) - (1 + a) ** (1 - E) / (E - 1))
        raise DomainError("tail mass is implemented for n <= 2")


@dataclass(frozen=True)
class DensityFunction:
    """Piecewise-linear interpolation of samples on a uniform grid over [0, 1]."""

    samples: np.ndarray = field(repr=False)

    def __init__(self, samples):
        arr = np.asarray(samples, dtype=complex).ravel()
        if arr.size < 2:
            raise DomainError("need at least two samples")
        if not np.all(np.isfinite(arr)):
            raise DomainError("density samples must be finite")
        object.__setattr__(self, "samples", arr)

    @classmethod
    def constant(cls, value: complex = 1.0, grid: int = 1) -> "DensityFunction":
        return cls(np.full(grid + 1, value, dtype=complex))

    @classmethod
    def random(cls, rng: np.random.Generator, grid: int = 64) -> "DensityFunction":
        return cls(rng.standard_normal(grid + 1) + 1j * rng.standard_normal(grid + 1))

    @property
    def grid(self) -> int:
        return self.samples.size - 1

    @property
    def knots(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid + 1)

    def max_abs(self) -> float:
        return float(np.abs(self.samples).max())

    def l1(self) -> float:
        """Upper bound for int_0^1 |f| (trapezoid of |samples|, exact bound for linear pieces)."""
        a = np.abs(self.samples)
        return float((a[:-1] + a[1:]).sum() / (2 * self.grid))

    def restrict(self, a: float, b: float) -> "DensityFunction":
        """Zero the samples outside [a, b] (support then lies in [a, b])."""
        k = self.knots
        return DensityFunction(np.where((k >= a) & (k <= b), self.samples, 0))

    def __call__(self, t) -> np.ndarray:
        t = np.asarray(t, dtype=float)
        k = self.knots
        return np.interp(t, k, self.samples.real) + 1j * np.interp(t, k, self.samples.imag)


def _panel_breaks(a: float, b: float, knots: np.ndarray, max_len: float) -> np.ndarray:
    """Breakpoints on [a, b] containing every density knot inside, no panel longer than max_len."""
    inner = knots[(knots > a) & (knots < b)]
    base = np.concatenate(([a], inner, [b]))
    pieces = [base[:1]]
    for lo, hi in zip(base[:-1], base[1:]):
        k = max(1, math.ceil((hi - lo) / max_len - 1e-12))
        pieces.append(np.linspace(lo, hi, k + 1)[1:])
    return np.concatenate(pieces)


def _phase_rate(curve: Curve, x_bound: np.ndarray) -> float:
    """Bound on |d/dt 2 pi x . gamma(t)| for |x_k| <= x_bound[k]."""
    return TWO_PI * float(np.dot(np.abs(x_bound), curve.speed_bounds()))


def _interval_rule(curve: Curve, f: DensityFunction, a: float, b: float, rate: float, per_radian: float, q: int):
    max_len = 1.0 / (per_radian * rate) if rate > 0 else b - a
    breaks = _panel_breaks(a, b, f.knots, max_len)
    t, w = composite_rule(breaks, q)
    return t, w, len(breaks) - 1


EVAL_MAX_PANELS = 10**6


@dataclass(frozen=True)
class ExtensionValue:
    value: complex
    coarse: complex
    error_estimate: float
    panels: int
    accurate: bool


def extension_eval_detail(
    curve: Curve,
    f: DensityFunction,
    I: tuple[float, float],
    x: Sequence[float],
    *,
    panels_per_radian: float = 8.0,
    q: int = 8,
    x_max: float = 1e4,
    max_panels: int = EVAL_MAX_PANELS,
) -> ExtensionValue:
    a, b = float(I[0]), float(I[1])
    if not 0 <= a <= b <= 1:
        raise DomainError(f"I = [{a}, {b}] is not a subinterval of [0, 1]")
    x = np.asarray(x, dtype=float)
    if x.shape != (curve.n,):
        raise DomainError(f"x must have {curve.n} coordinates")
    if np.linalg.norm(x) > x_max:
        raise DomainError(f"|x| = {np.linalg.norm(x):.4g} exceeds the configured maximum {x_max}")
    rate = _phase_rate(curve, x)
    needed = math.ceil(2 * panels_per_radian * rate * (b - a)) + f.grid
    if needed > max_panels:
        raise BudgetExceeded("quadrature panels", needed, max_panels)

    def value(per_rad):
        t, w, p = _interval_rule(curve, f, a, b, rate, per_rad, q)
        g = curve.derivative(0, t)
        return complex(np.sum(w * np.exp(2j * math.pi * (g @ x)) * f(t))), p

    coarse, p = value(panels_per_radian)
    fine, _ = value(2 * panels_per_radian)
    err = abs(fine - coarse)
    scale = 1.0 + (b - a) * f.max_abs()
    ok = err <= 1e-6 * max(abs(fine), 1e-300) or err <= 1e-8 * scale
    if not ok:
        warnings.warn(f"extension quadrature levels differ by {err:.3g}", AccuracyWarning, stacklevel=3)
    return ExtensionValue(fine, coarse, err, p, ok)


def extension_eval(curve: Curve, f: DensityFunction, I: tuple[float, float], x: Sequence[float], **kw) -> complex:
    """E_I f(x) by oscillation-resolving Gauss panels; two refinement levels are compared
    and an AccuracyWarning is emitted when they disagree."""
    return extension_eval_detail(curve, f, I, x, **kw).value


# ---------------------------------------------------------------------------
# grid probes
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class GridConfig:
    """Quadrature configuration shared by all norms in one probe.

    ``threshold`` truncates the x-domain to the disc where w_B >= threshold.
    Grid spacing along axis k is 1 / (oversample * 2 * m_max * span_k), with
    span_k the range of gamma_k.  |E f|^(2m) has frequencies in
    [-m span_k, m span_k], so oversample = 1 already halves the spacing at
    which the trapezoid sum stops being exact. ``panel_phase`` bounds the phase change (in
    radians) across one Gauss panel in t.
    """

    threshold: float = 1e-2
    oversample: float = 1.0
    panel_phase: float = 2.0
    gauss: int = 8
    max_points: int = 4 * 10**6
    max_R: int = 8
    max_ball: float = 64.0

    def to_dict(self) -> dict:
        return asdict(self)


def _coordinate_spans(curve: Curve) -> np.ndarray:
    t = np.linspace(0.0, 1.0, 2049)
    g = curve.derivative(0, t)
    return g.max(axis=0) - g.min(axis=0)


@dataclass(frozen=True)
class ProbeResult:
    R: int
    ball: BallWeight
    grid: GridConfig
    points: int
    radius: float
    tail_mass: float
    l1_bound: float
    power_sums: dict          # 2m -> (sum w |E f|^{2m}, sum w (sum_I |E_I f|^2)^m)
    piece_norms: dict         # p -> array of ||E_I f||_{L^p(w_B)}

    def tail_estimate(self, p: float) -> float:
        """Bound on the truncated part of int |F|^p w_B, since |F| <= int |f|."""
        return self.l1_bound**p * self.tail_mass


def _check_probe(curve: Curve, R: int, ball: BallWeight, grid: GridConfig) -> None:
    if curve.n != 2:
        raise DomainError("grid probes are limited to n = 2")
    if ball.n != curve.n:
        raise DomainError("ball dimension does not match the curve")
    if int(R) != R or R < 2:
        raise DomainError("R must be an integer >= 2")
    if R > grid.max_R:
        raise DomainError(f"R = {R} exceeds the desk-scale cap {grid.max_R}")
    if ball.radius < R**curve.n:
        raise DomainError(f"ball radius {ball.radius} is below R^n = {R ** curve.n}")
    if ball.radius > grid.max_ball:
        raise DomainError(f"ball radius {ball.radius} exceeds the cap {grid.max_ball}")


def run_probe(
    curve: Curve,
    f: DensityFunction,
    R: int,
    ball: BallWeight,
    grid: GridConfig = GridConfig(),
    exponents: Sequence[int] = (2, 4),
) -> ProbeResult:
    """Evaluate E_I f for every |I| = 1/R on one grid and collect weighted power sums.

    ``exponents`` are the even L^p exponents needed (p = 2m).
    """
    _check_probe(curve, R, ball, grid)
    exps = sorted({int(p) for p in exponents})
    if any(p < 2 or p % 2 or p > 2 * curve.n for p in exps):
        raise DomainError(f"exponents must be even integers in [2, {2 * curve.n}]")
    m_max = exps[-1] // 2
    L = ball.truncation_radius(grid.threshold)
    h = 1.0 / (grid.oversample * 2 * m_max * _coordinate_spans(curve))
    K = np.ceil(L / h).astype(int)
    axes = [ball.center[k] + h[k] * np.arange(-K[k], K[k] + 1) for k in range(2)]
    npts = axes[0].size * axes[1].size
    if npts > grid.max_points:
        raise BudgetExceeded("grid points", npts, grid.max_points)
    X1, X2 = np.meshgrid(axes[0], axes[1], indexing="ij")
    r = np.hypot(X1 - ball.center[0], X2 - ball.center[1])
    weight = np.where(r <= L, (1.0 + r / ball.radius) ** (-ball.exponent), 0.0) * (h[0] * h[1])
    weight = np.ascontiguousarray(weight)

    x_bound = np.array([np.abs(axes[0]).max(), np.abs(axes[1]).max()])
    rate = _phase_rate(curve, x_bound)
    S = np.zeros(X1.shape, dtype=complex)
    Q = np.zeros(X1.shape)
    piece = {p: np.zeros(R) for p in exps}
    for i in range(R):
        t, w, _ = _interval_rule(curve, f, i / R, (i + 1) / R, rate, 1.0 / grid.panel_phase, grid.gauss)
        g = curve.derivative(0, t)
        c = w * f(t)
        U = np.exp(2j * math.pi * np.outer(axes[0], g[:, 0])) * c
        V = np.exp(2j * math.pi * np.outer(axes[1], g[:, 1]))
        A = U @ V.T
        S += A
        P = A.real**2 + A.imag**2
        Q += P
        for p in exps:
            piece[p][i] = np.sum(weight * P ** (p // 2)) ** (1.0 / p)
    Ps = S.real**2 + S.imag**2
    sums = {p: (float(np.sum(weight * Ps ** (p // 2))), float(np.sum(weight * Q ** (p // 2)))) for p in exps}
    return ProbeResult(R, ball, grid, npts, L, ball.tail_mass(L), f.l1(), sums, piece)


@dataclass(frozen=True)
class RatioReport:
    kind: str
    n: int
    exponent: int            # m for the square function, p for decoupling
    R: int
    ball: dict
    grid: dict
    lhs: float
    rhs: float
    ratio: float
    tail_estimate: float

    def to_dict(self) -> dict:
        d = asdict(self)
        d["m" if self.kind == "square-function" else "p"] = d.pop("exponent")
        return d


def _ball_dict(ball: BallWeight) -> dict:
    return {"center": list(ball.center), "radius": ball.radius, "exponent": ball.exponent}


def _ratio(lhs: float, rhs: float) -> float:
    if rhs == 0:
        if lhs > 0:
            raise ConvergenceError("quadrature failure: square function vanishes while E f does not", lhs)
        return 1.0
    return lhs / rhs


def square_function_from(probe: ProbeResult, m: int) -> RatioReport:
    p = 2 * m
    if p not in probe.power_sums:
        raise DomainError(f"probe did not collect exponent {p}")
    lhs_p, rhs_p = probe.power_sums[p]
    lhs, rhs = lhs_p ** (1.0 / p), rhs_p ** (1.0 / p)
    return RatioReport(
        "square-function", 2, m, probe.R, _ball_dict(probe.ball), probe.grid.to_dict(),
        lhs, rhs, _ratio(lhs, rhs), probe.tail_estimate(p),
    )


MINKOWSKI_SLACK = 1e-9


def decoupling_from(probe: ProbeResult, p: int) -> RatioReport:
    """Decoupling ratio; raises InvariantViolation if the square-function side
    exceeds the l^2-decoupling side (Minkowski) beyond rounding slack."""
    if p not in probe.power_sums:
        raise DomainError(f"probe did not collect exponent {p}")
    lhs = probe.power_sums[p][0] ** (1.0 / p)
    rhs = float(np.sqrt(np.sum(probe.piece_norms[p] ** 2)))
    sq = square_function_from(probe, p // 2).rhs
    if sq > rhs * (1 + MINKOWSKI_SLACK):
        raise InvariantViolation(f"square function {sq!r} exceeds decoupling side {rhs!r} at p = {p}")
    return RatioReport(
        "decoupling", 2, p, probe.R, _ball_dict(probe.ball), probe.grid.to_dict(),
        lhs, rhs, _ratio(lhs, rhs), probe.tail_estimate(p),
    )


def square_function_ratio(
    curve: Curve, f: DensityFunction, R: int, m: int, ball: BallWeight, grid: GridConfig = GridConfig()
) -> RatioReport:
    if not 1 <= m <= curve.n:
        raise DomainError(f"m must lie in [1, {curve.n}]")
    return square_function_from(run_probe(curve, f, R, ball, grid, (2 * m,)), m)


def decoupling_ratio(
    curve: Curve, f: DensityFunction, R: int, p: int, ball: BallWeight, grid: GridConfig = GridConfig()
) -> RatioReport:
    return decoupling_from(run_probe(curve, f, R, ball, grid, (p,)), p)
