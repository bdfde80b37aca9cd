"""Sequence norms and the explicit-constant discrete decoupling check."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .counting import TABLE_BUDGET, PhiMap, weighted_moment
from .errors import DomainError

HOLDS_RTOL = 1e-9
LORENTZ_RTOL = 1e-12


@dataclass(frozen=True)
class CoefficientVector:
    entries: np.ndarray = field(repr=False)

    def __init__(self, entries):
        arr = np.atleast_1d(np.asarray(entries))
        if arr.ndim != 1 or arr.size == 0:
            raise DomainError("coefficient vector must be a non-empty 1-d sequence")
        if not np.issubdtype(arr.dtype, np.number) and arr.dtype != object:
            raise DomainError(f"non-numeric coefficients ({arr.dtype})")
        if arr.dtype != object and not np.all(np.isfinite(arr)):
            raise DomainError("coefficients must be finite")
        object.__setattr__(self, "entries", arr)

    @classmethod
    def indicator(cls, N: int, support) -> "CoefficientVector":
        a = np.zeros(N, dtype=np.int64)
        idx = np.asarray(sorted(support), dtype=np.int64)
        if idx.size and (idx.min() < 1 or idx.max() > N):
            raise DomainError(f"support outside 1..{N}")
        a[idx - 1] = 1
        return cls(a)

    @property
    def N(self) -> int:
        return int(self.entries.size)

    def moduli(self) -> np.ndarray:
        return np.abs(self.entries.astype(complex))

    def __len__(self) -> int:
        return self.N


def _moduli(a) -> np.ndarray:
    return a.moduli() if isinstance(a, CoefficientVector) else CoefficientVector(a).moduli()


def _check_p(p: float) -> None:
    if not p > 1:
        raise DomainError(f"p must exceed 1, got {p}")


def conjugate_exponent(p: float) -> float:
    _check_p(p)
    return p / (p - 1)


def distribution_function(a, s: float) -> int:
    """#{j : |a_j| > s}."""
    return int(np.count_nonzero(_moduli(a) > s))


def lp_norm(a, p: float) -> float:
    m = _moduli(a)
    top = m.max()
    if top == 0:
        return 0.0
    # scaling keeps the equal-moduli case bit-exact and avoids overflow at large p
    return float(top * np.sum((m / top) ** p) ** (1.0 / p))


def lorentz_p1_norm(a, p: float) -> float:
    """Integral of lambda_a(s)^(1/p) ds, evaluated piece by piece on the sorted moduli."""
    _check_p(p)
    m = np.sort(_moduli(a))[::-1]
    drops = m - np.append(m[1:], 0.0)
    k = np.arange(1, m.size + 1, dtype=float)
    return float(np.sum(k ** (1.0 / p) * drops))


def lorentz_factor(N: int, p: float) -> float:
    """1 + p^-1 (log N)^(1/p'), natural log."""
    return 1.0 + math.log(N) ** (1.0 / conjugate_exponent(p)) / p


@dataclass(frozen=True)
class NormComparison:
    N: int
    p: float
    lhs: float
    rhs: float
    holds: bool

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else math.inf

    def to_dict(self) -> dict:
        return {"N": self.N, "p": self.p, "lhs": self.lhs, "rhs": self.rhs, "ratio": self.ratio, "holds": self.holds}


def lorentz_bound_check(a, p: float) -> NormComparison:
    """Compare the l^{p,1} norm with (1 + p^-1 (log N)^(1/p')) times the l^p norm."""
    a = a if isinstance(a, CoefficientVector) else CoefficientVector(a)
    lhs = lorentz_p1_norm(a, p)
    rhs = lorentz_factor(a.N, p) * lp_norm(a, p)
    return NormComparison(a.N, p, lhs, rhs, lhs <= rhs + LORENTZ_RTOL * rhs)


def four_part_split(a) -> tuple[CoefficientVector, ...]:
    """Positive and negative parts of Re a and Im a, each non-negative."""
    z = np.asarray(getattr(a, "entries", a)).astype(complex)
    re, im = z.real, z.imag
    parts = (np.maximum(re, 0), np.maximum(-re, 0), np.maximum(im, 0), np.maximum(-im, 0))
    return tuple(CoefficientVector(x + 0.0) for x in parts)


@dataclass(frozen=True)
class DecouplingCheckConfig:
    s: int
    theta: float
    c: float

    def __post_init__(self):
        if self.s < 1:
            raise DomainError("s must be >= 1")
        if not (self.s <= self.theta < 2 * self.s):
            raise DomainError(f"theta must lie in [s, 2s) = [{self.s}, {2 * self.s}), got {self.theta}")
        if not self.c > 0:
            raise DomainError("c must be positive")

    @property
    def p(self) -> float:
        return 2 * self.s / self.theta

    @property
    def p_conj(self) -> float:
        return conjugate_exponent(self.p)

    @property
    def c_prime(self) -> float:
        p, q = self.p, self.p_conj
        return 2 ** (1 / p) * 4 ** (1 / q) * self.c ** (1 / (2 * self.s))

    def to_dict(self) -> dict:
        return {"s": self.s, "theta": self.theta, "c": self.c, "p": self.p, "p_conj": self.p_conj, "c_prime": self.c_prime}


@dataclass(frozen=True)
class DecouplingReport:
    N: int
    config: DecouplingCheckConfig
    moment: object
    lhs: float
    rhs: float
    holds: bool
    seed: int | None = None

    @property
    def ratio(self) -> float:
        return self.lhs / self.rhs if self.rhs else (0.0 if self.lhs == 0 else math.inf)

    def to_dict(self) -> dict:
        m = self.moment
        return {
            "N": self.N,
            "p": self.config.p,
            "config": self.config.to_dict(),
            "moment": m if isinstance(m, (int, float)) else str(m),
            "lhs": self.lhs,
            "rhs": self.rhs,
            "ratio": self.ratio,
            "holds": self.holds,
            "seed": self.seed,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)


def decoupling_check(
    phi: PhiMap,
    a,
    cfg: DecouplingCheckConfig,
    *,
    budget: int = TABLE_BUDGET,
    workers: int = 1,
    seed: int | None = None,
) -> DecouplingReport:
    """Exact 2s-th moment against c' (1 + p^-1 (log N)^(1/p')) ||a||_p."""
    a = a if isinstance(a, CoefficientVector) else CoefficientVector(a)
    if a.N != phi.N:
        raise DomainError(f"coefficient length {a.N} does not match phi.N = {phi.N}")
    moment = weighted_moment(phi, a.entries, cfg.s, budget=budget, workers=workers)
    lhs = float(moment) ** (1.0 / (2 * cfg.s))
    rhs = cfg.c_prime * lorentz_factor(a.N, cfg.p) * lp_norm(a, cfg.p)
    return DecouplingReport(a.N, cfg, moment, lhs, rhs, lhs <= rhs * (1 + HOLDS_RTOL), seed)


def indicator_bound(J: int, S_size: int, N: int, cfg: DecouplingCheckConfig) -> tuple[float, float]:
    """The counting form: J against c'^{2s} (1 + ...)^{2s} |S|^{2s/p}."""
    k = 2 * cfg.s
    return float(J), (cfg.c_prime * lorentz_factor(N, cfg.p)) ** k * S_size ** (k / cfg.p)


def random_complex(rng: np.random.Generator, N: int) -> np.ndarray:
    return rng.standard_normal(N) + 1j * rng.standard_normal(N)


def lorentz_sweep(trials: int, N_max: int, ps: Sequence[float], seed: int) -> list[NormComparison]:
    """Random complex vectors with random length in [1, N_max], one check per (vector, p).

    Gaussian, heavy-tailed and sparse moduli are cycled so that both flat
    and spiky distribution functions are exercised.
    """
    rng = np.random.default_rng(seed)
    out = []
    for i in range(trials):
        N = int(rng.integers(1, N_max + 1))
        z = random_complex(rng, N)
        if i % 3 == 1:
            z *= rng.pareto(1.5, N) + 1e-3
        elif i % 3 == 2:
            z *= rng.random(N) < 0.05
            z[0] += 1.0
        a = CoefficientVector(z)
        out.extend(lorentz_bound_check(a, p) for p in ps)
    return out
