"""The acceptance suite: one function per criterion, each returning a deterministic record.

Reports exclude wall-clock timings unless asked for, so two runs with the same
seed and worker count serialize to identical bytes.
"""
from __future__ import annotations

import json
import math
import time
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations, product
from typing import Callable

import numpy as np

from . import counting, curves, extension, intervals, norms, pte
from .counting import PhiMap, diagonal_count
from .curves import Curve
from .errors import CountdecError, InvariantViolation

DEFAULT_SEED = 20170815


@dataclass
class CriterionResult:
    id: int
    name: str
    passed: bool
    details: dict
    elapsed_s: float = field(default=0.0, compare=False)

    def to_dict(self, timing: bool = False) -> dict:
        d = {"id": self.id, "name": self.name, "passed": self.passed, "details": self.details}
        if timing:
            d["elapsed_s"] = round(self.elapsed_s, 3)
        return d

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] criterion {self.id:2d}: {self.name}"


def _rng(seed: int, cid: int, *extra: int) -> np.random.Generator:
    return np.random.default_rng([seed, cid, *extra])


# ---------------------------------------------------------------------------

def c01_diagonal_only(seed: int, workers: int) -> CriterionResult:
    failures = []
    checked = 0
    for n in (2, 3, 4):
        for s in range(1, n + 1):
            for X in range(1, 13):
                t = counting.count_solutions_bruteforce(PhiMap.moment_powers(X, n), range(1, X + 1), s, budget=12**8)
                checked += 1
                if t.J != t.diagonal:
                    failures.append([n, s, X, t.J, t.diagonal])
    for X in range(1, 1001):
        t = counting.count_solutions_mitm(PhiMap.moment_powers(X, 2), range(1, X + 1), 2, workers=workers)
        checked += 1
        if t.J != diagonal_count(X, 2):
            failures.append([2, 2, X, t.J, diagonal_count(X, 2)])
    return CriterionResult(1, "only diagonal solutions for s <= n", not failures,
                           {"instances": checked, "failures": failures, "J_2_2_1000": t.J})


def c02_diagonal_asymptotics(seed: int, workers: int) -> CriterionResult:
    rows = []
    for X in (10, 100, 1000):
        J = counting.count_solutions_mitm(PhiMap.moment_powers(X, 2), range(1, X + 1), 2, workers=workers).J
        rows.append({"X": X, "J": J, "formula": 2 * X * X - X})
    # leading coefficient from two exact values: J(X) = aX^2 + bX
    a = Fraction(rows[2]["J"] * 100 - rows[1]["J"] * 1000, 1000 * 1000 * 100 - 100 * 100 * 1000)
    ok = all(r["J"] == r["formula"] for r in rows) and a == math.factorial(2)
    return CriterionResult(2, "J_{2,2}(X) = 2X^2 - X", ok, {"rows": rows, "leading_coefficient": str(a)})


def c03_engine_equivalence(seed: int, workers: int) -> CriterionResult:
    bad, cases = [], 0
    for n in (1, 2, 3):
        phi = PhiMap.moment_powers(6, n)
        for k in range(0, 7):
            for S in combinations(range(1, 7), k):
                for s in (1, 2, 3):
                    a = counting.count_solutions_bruteforce(phi, S, s)
                    b = counting.count_solutions_mitm(phi, S, s)
                    cases += 1
                    if (a.J, a.diagonal) != (b.J, b.diagonal):
                        bad.append([n, list(S), s, a.J, b.J])
    return CriterionResult(3, "brute force and meet-in-the-middle agree", not bad,
                           {"cases": cases, "discrepancies": bad})


def c04_pte(seed: int, workers: int) -> CriterionResult:
    t0 = time.perf_counter()
    found = {}
    expected = {(2, 3, 7): [[1, 5, 6], [2, 3, 7]], (3, 4, 12): [[1, 5, 8, 12], [2, 3, 10, 11]]}
    ok = True
    for (n, s, X), sides in expected.items():
        r = pte.find_offdiagonal(n, s, X)
        found[f"{n},{s},{X}"] = r.to_dict()
        ok &= r.status == "found" and r.to_dict()["sides"] == sides
    nones = []
    for n in (1, 2, 3, 4):
        for s in range(1, n + 1):
            for distinct in (True, False):
                r = pte.find_offdiagonal(n, s, 12, distinct=distinct)
                nones.append([n, s, distinct, r.status])
                ok &= r.status == "none"
    elapsed = time.perf_counter() - t0
    ok &= elapsed < 60
    return CriterionResult(4, "off-diagonal witnesses exist exactly when s > n", ok,
                           {"witnesses": found, "none_checks": nones})


def c05_amplification(seed: int, workers: int) -> CriterionResult:
    base = pte.find_offdiagonal(2, 3, 7).witness
    rows, ok = [], True
    for X in (50, 100, 200):
        seen = set()
        for sol in pte.amplify(base, X):  # construction re-verifies each tuple
            seen.add(sol.x)
        closed = pte.amplified_count(base, X)
        count = sum(1 for _ in pte.amplify_indices(base, X))
        rows.append({"X": X, "count": count, "distinct": len(seen), "closed_form": closed})
        ok &= count == closed == len(seen)
    slope = pte.growth_exponent([(r["X"], r["count"]) for r in rows])
    ok &= 1.9 <= slope <= 2.1
    return CriterionResult(5, "translation-dilation amplification grows like X^2", ok,
                           {"base": base.to_dict()["sides"], "rows": rows, "slope": slope})


def _dft_moment(a: np.ndarray, s: int) -> float:
    # |sum_j a_j e(j alpha)|^(2s) is a trigonometric polynomial of degree < 2sN,
    # so the mean over M > 2sN equispaced points is exact.
    N = a.size
    M = 2 * s * N + 1
    alpha = np.arange(M) / M
    F = np.exp(2j * np.pi * np.outer(alpha, np.arange(1, N + 1))) @ a
    return float(np.mean(np.abs(F) ** (2 * s)))


def c06_moment_identity(seed: int, workers: int) -> CriterionResult:
    bad = []
    for n in (1, 2, 3):
        phi = PhiMap.moment_powers(6, n)
        for k in range(0, 7):
            for S in combinations(range(1, 7), k):
                a = norms.CoefficientVector.indicator(6, S)
                for s in (1, 2, 3):
                    J = counting.count_solutions_mitm(phi, S, s).J
                    if counting.weighted_moment(phi, a, s) != J:
                        bad.append([n, list(S), s])
    rng = _rng(seed, 6)
    worst = 0.0
    for _ in range(50):
        N = int(rng.integers(1, 5))
        a = norms.random_complex(rng, N)
        for s in (1, 2):
            exact = counting.weighted_moment(PhiMap.moment_powers(N, 1), a, s)
            worst = max(worst, abs(exact - _dft_moment(a, s)) / _dft_moment(a, s))
    ok = not bad and worst <= 1e-9
    return CriterionResult(6, "weighted moment equals J and the Fourier integral", ok,
                           {"indicator_mismatches": bad, "max_rel_err_random": worst})


def c07_decoupling(seed: int, workers: int) -> CriterionResult:
    cfg = norms.DecouplingCheckConfig(2, 2, 2)
    rng = _rng(seed, 7)
    violations, worst = 0, 0.0
    for trial in range(400):
        N = int(rng.integers(1, 201))
        if trial < 200:
            a = norms.random_complex(rng, N)
        else:
            a = (rng.random(N) < rng.uniform(0.05, 1.0)).astype(np.int64)
            a[int(rng.integers(N))] = 1
        r = norms.decoupling_check(PhiMap.moment_powers(N, 2), a, cfg, workers=workers)
        violations += not r.holds
        worst = max(worst, r.ratio)
    return CriterionResult(7, "discrete decoupling with the explicit constant", violations == 0,
                           {"config": cfg.to_dict(), "trials": 400, "violations": violations, "max_ratio": worst})


def c08_lorentz(seed: int, workers: int) -> CriterionResult:
    ps = (1.25, 2, 3, 10)
    checks = norms.lorentz_sweep(1000, 10**4, ps, seed)
    violations = sum(not c.holds for c in checks)
    equal_ok = True
    for N, v, p in product((1, 7, 1000, 10**4), (1.0, 0.37, 5.5 + 2j), ps):
        a = norms.CoefficientVector(np.full(N, v))
        equal_ok &= norms.lorentz_p1_norm(a, p) == norms.lp_norm(a, p)
    return CriterionResult(8, "Lorentz norm bounded by log-factor times l^p", violations == 0 and equal_ok,
                           {"checks": len(checks), "violations": violations,
                            "max_ratio": max(c.ratio for c in checks), "equality_case_exact": equal_ok})


def c09_vandermonde(seed: int, workers: int) -> CriterionResult:
    rng = _rng(seed, 9)
    worst = 0.0
    c = None
    for n in range(1, 7):
        c = Curve.normalized_moment(n)
        for _ in range(1000):
            u = np.sort(rng.random(n))
            det = curves.first_derivative_det(c, u)
            v = float(curves.vandermonde(u))
            worst = max(worst, abs(det - v) / abs(v))
    return CriterionResult(9, "first-derivative determinant equals the Vandermonde product", worst <= 1e-10,
                           {"max_rel_err": worst})


def c10_sigma(seed: int, workers: int) -> CriterionResult:
    rng = _rng(seed, 10)
    worst = 0.0
    for m in (1, 2, 3):
        for _ in range(100):
            spec = curves.SigmaSpec(tuple(np.sort(rng.random(m))))
            a = curves.sigma_mass(spec, "closed-form")
            b = curves.sigma_mass(spec, "recursive-quadrature")
            worst = max(worst, abs(a - b) / abs(a))
    consts = [str(curves.sigma_constant(m)) for m in (1, 2, 3, 4)]
    ok = worst <= 1e-6 and consts == ["1", "1", "1/2", "1/12"]
    return CriterionResult(10, "closed-form and recursive sigma masses agree", ok,
                           {"max_rel_err": worst, "c_m": consts})


MULTILINEAR_CURVES = {
    "normalized-moment": Curve.normalized_moment(3),
    "standard-moment": Curve.standard_moment(3),
    "polynomial": Curve.polynomial([[0, 1, 0, Fraction(1, 3)], [0, 0, 1, -1], [0, 0, 0, 2]]),
}


def c11_multilinear(seed: int, workers: int) -> CriterionResult:
    rng = _rng(seed, 11)
    worst = {}
    for name, c in MULTILINEAR_CURVES.items():
        for m in (2, 3):
            res = 0.0
            for _ in range(20):
                t = np.sort(rng.random(m))
                res = max(res, curves.multilinear_identity_check(c, t, m))
            worst[f"{name}/m={m}"] = res
    return CriterionResult(11, "multilinear determinant identity", max(worst.values()) <= 1e-4,
                           {"max_residual": worst})


def c12_permutation_equivalence(seed: int, workers: int) -> CriterionResult:
    counter, configs = 0, 0
    try:
        for n in (1, 2, 3):
            for xy in product(range(5), repeat=2 * n):
                intervals.theta_permutation_test(xy[:n], xy[n:])
                configs += 1
        rng = _rng(seed, 12)
        for _ in range(10**5):
            n = int(rng.integers(1, 7))
            fam = intervals.random_family(rng, n, int(rng.integers(2, 13)))
            intervals.theta_permutation_test([p[0] for p in fam.pairs], [p[1] for p in fam.pairs])
    except InvariantViolation:
        counter += 1
    return CriterionResult(12, "Theta vanishes exactly for permutations", counter == 0,
                           {"exhaustive_configurations": configs, "random_families": 10**5, "counterexamples": counter})


def c13_decomposition(seed: int, workers: int) -> CriterionResult:
    rng = _rng(seed, 13)
    failures = 0
    max_ell = 0
    for _ in range(10**5):
        n = int(rng.integers(1, 7))
        fam = intervals.random_family(rng, n, int(rng.integers(2, 13)))
        try:
            d = intervals.sign_decomposition(fam)
        except InvariantViolation:
            failures += 1
            continue
        max_ell = max(max_ell, d.ell)
        failures += not intervals.reconstruction_holds(d, n)
    long_fail = 0
    for n, R in ((2, 16), (3, 16), (4, 32)):
        rep = intervals.separation_harness(Curve.normalized_moment(n), R, 10, 1, 2000, seed + n, workers=workers)
        long_fail += rep.long_interval_failures
    ok = failures == 0 and long_fail == 0
    return CriterionResult(13, "sign-constant decomposition and long component", ok,
                           {"random_families": 10**5, "failures": failures, "max_ell": max_ell,
                            "long_interval_failures": long_fail})


def c14_separation(seed: int, workers: int) -> CriterionResult:
    runs, ok = [], True
    for n, R in ((2, 16), (2, 64), (3, 16)):
        c = Curve.normalized_moment(n)
        rep = intervals.separation_harness(c, R, 10, 1, 10**4, seed, workers=workers)
        entry = {"n": n, "R": R, "c0": 10, "min_scaled_gap": rep.min_scaled_gap, "violations": rep.violations}
        if rep.violations:
            try:
                entry["calibrated_c0"] = intervals.calibrate_c0(c, R, 1, 10**4, seed)
            except CountdecError as exc:  # calibration failure fails the criterion
                entry["calibration_error"] = str(exc)
                ok = False
        runs.append(entry)
    return CriterionResult(14, "separation of non-permutation sums", ok, {"runs": runs})


def c15_extension_probe(seed: int, workers: int, densities: int = 20) -> CriterionResult:
    t0 = time.perf_counter()
    curve = Curve.normalized_moment(2)
    rng = _rng(seed, 15)
    fs = [extension.DensityFunction.random(rng) for _ in range(densities)]
    maxima, mink_ok, collapse_ok, finite = {}, True, True, True
    worst_collapse = 0.0
    for R in (4, 8):
        ball = extension.BallWeight((0.0, 0.0), float(R**2))
        ratios = {1: [], 2: []}
        for f in fs:
            probe = extension.run_probe(curve, f, R, ball, exponents=(2, 4))
            for m in (1, 2):
                ratios[m].append(extension.square_function_from(probe, m).ratio)
            try:
                extension.decoupling_from(probe, 4)
            except InvariantViolation:
                mink_ok = False
            d2 = extension.decoupling_from(probe, 2).rhs
            s2 = extension.square_function_from(probe, 1).rhs
            worst_collapse = max(worst_collapse, abs(d2 - s2) / s2)
        finite &= all(math.isfinite(r) for v in ratios.values() for r in v)
        maxima[R] = {m: max(v) for m, v in ratios.items()}
    collapse_ok = worst_collapse <= 1e-9
    stable = all(0.5 <= maxima[8][m] / maxima[4][m] <= 2 for m in (1, 2))
    ok = finite and stable and mink_ok and collapse_ok and time.perf_counter() - t0 < 600
    return CriterionResult(15, "square-function probe (empirical, desk scale)", ok, {
        "densities": densities,
        "max_ratio": {str(R): {str(m): v for m, v in d.items()} for R, d in maxima.items()},
        "stable_within_factor_2": stable,
        "minkowski_ordering": mink_ok,
        "p2_collapse_max_rel": worst_collapse,
    })


CRITERIA: dict[int, Callable[[int, int], CriterionResult]] = {
    1: c01_diagonal_only,
    2: c02_diagonal_asymptotics,
    3: c03_engine_equivalence,
    4: c04_pte,
    5: c05_amplification,
    6: c06_moment_identity,
    7: c07_decoupling,
    8: c08_lorentz,
    9: c09_vandermonde,
    10: c10_sigma,
    11: c11_multilinear,
    12: c12_permutation_equivalence,
    13: c13_decomposition,
    14: c14_separation,
    15: c15_extension_probe,
}


def run_criterion(cid: int, seed: int = DEFAULT_SEED, workers: int = 1) -> CriterionResult:
    t0 = time.perf_counter()
    res = CRITERIA[cid](seed, workers)
    res.elapsed_s = time.perf_counter() - t0
    return res


def run_suite(ids=None, seed: int = DEFAULT_SEED, workers: int = 1, progress: Callable[[CriterionResult], None] | None = None):
    out = []
    for cid in ids or sorted(CRITERIA):
        res = run_criterion(cid, seed, workers)
        if progress:
            progress(res)
        out.append(res)
    return out


def suite_report(results, seed: int, workers: int, timing: bool = False) -> str:
    """Serialized report; criterion 16 compares two of these byte for byte."""
    doc = {
        "seed": seed,
        "workers": workers,
        "criteria": [r.to_dict(timing) for r in results],
        "all_passed": all(r.passed for r in results),
    }
    return json.dumps(doc, sort_keys=True, indent=2)
