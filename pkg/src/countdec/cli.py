"""Command-line front end.

Exit codes: 0 when every assertion of the subcommand passed, 1 on an
assertion failure, 2 when the configuration is invalid or a budget refuses
the job.  Every JSON report embeds the resolved configuration.

CSV column orders (stable):
  amplify        q,h                      (summary lines prefixed with '#')
  lorentz-check  trial,N,p,lhs,rhs,ratio,holds
  decouple-check trial,kind,N,lhs,rhs,ratio,holds
  sqfn-probe     R,density,m,ratio
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction
from itertools import product
from pathlib import Path

import numpy as np

from . import counting, curves, extension, intervals, norms, pte, suite
from .counting import PhiMap
from .curves import Curve
from .errors import CountdecError, InvariantViolation

DEFAULT_SEED = suite.DEFAULT_SEED


class Failure(Exception):
    """A subcommand's assertion did not hold; the report is still emitted."""

    def __init__(self, report):
        super().__init__("assertion failed")
        self.report = report


def _curve(args) -> Curve:
    if getattr(args, "curve_file", None):
        return curves.load_curve(args.curve_file)
    kind = args.curve
    if kind == "normalized-moment":
        return Curve.normalized_moment(args.n)
    if kind == "standard-moment":
        return Curve.standard_moment(args.n)
    raise CountdecError(f"curve kind {kind!r} needs --curve-file")


def _config(args) -> dict:
    skip = {"func", "out", "format", "config"}
    return {k: v for k, v in sorted(vars(args).items()) if k not in skip}


def _phi(args, N: int) -> PhiMap:
    if getattr(args, "phi_file", None):
        return counting.parse_phi_table(Path(args.phi_file).read_text())
    return PhiMap.moment_powers(N, args.n)


# ---------------------------------------------------------------------------
# subcommands; each returns (report, csv_rows or None) or raises Failure
# ---------------------------------------------------------------------------

def cmd_count(args):
    phi = _phi(args, args.X)
    S = counting.parse_subset(args.subset) if args.subset else range(1, phi.N + 1)
    tally = counting.count_solutions(phi, S, args.s, engine=args.engine)
    return tally.to_dict(timing=False), None


def cmd_diagonal_check(args):
    rows, ok = [], True
    s_max = args.s or args.n
    for s in range(1, s_max + 1):
        for X in range(1, args.X + 1):
            t = counting.count_solutions(PhiMap.moment_powers(X, args.n), range(1, X + 1), s, engine=args.engine)
            good = t.J == counting.diagonal_count(X, s)
            if s <= args.n:
                ok &= good
            if not good or X == args.X:
                rows.append({"s": s, "X": X, "J": t.J, "diagonal": t.diagonal, "diagonal_only": good})
    report = {"n": args.n, "X_max": args.X, "rows": rows, "all_diagonal": ok}
    if not ok:
        raise Failure(report)
    return report, None


def cmd_pte_search(args):
    r = pte.find_offdiagonal(args.n, args.s, args.X, budget=args.budget, distinct=not args.multisets)
    report = r.to_dict()
    if r.status == "budget":
        raise _Refusal(report, f"search budget of {args.budget} sides exhausted before X_max")
    return report, None


class _Refusal(CountdecError):
    def __init__(self, report, message):
        super().__init__(message)
        self.report = report


def _parse_base(text: str, n: int) -> pte.OffDiagonalSolution:
    left, right = text.split("|")
    xs = tuple(int(v) for v in left.split(",")) + tuple(int(v) for v in right.split(","))
    return pte.OffDiagonalSolution(xs, n, max(xs))


def cmd_amplify(args):
    if args.base:
        base = _parse_base(args.base, args.n)
    else:
        found = pte.find_offdiagonal(args.n, args.s, args.search_max)
        if found.witness is None:
            raise CountdecError(f"no base solution for n={args.n}, s={args.s} within X <= {args.search_max}")
        base = found.witness
    count = verified = 0
    rows = []
    for (q, h), sol in zip(pte.amplify_indices(base, args.X), pte.amplify(base, args.X)):
        count += 1
        verified += 1  # construction raises unless the tuple is a verified solution
        rows.append((q, h))
    closed = pte.amplified_count(base, args.X)
    report = {"n": args.n, "base": base.to_dict()["sides"], "X": args.X, "count": count,
              "closed_form": closed, "verified": verified}
    if count != closed:
        raise Failure(report)
    return report, (["q", "h"], rows, [("count", count), ("closed_form", closed)])


def _load_coefficients(path: str) -> np.ndarray:
    vals = [complex(line.strip().replace(" ", "")) for line in Path(path).read_text().splitlines()
            if line.strip() and not line.startswith("#")]
    return np.array(vals)


def cmd_moment(args):
    if args.coeffs_file:
        a = _load_coefficients(args.coeffs_file)
    elif args.random:
        a = norms.random_complex(np.random.default_rng(args.seed), args.X)
    else:
        a = np.ones(args.X, dtype=np.int64)
    phi = _phi(args, a.size)
    value = counting.weighted_moment(phi, a, args.s, workers=args.workers)
    out = value if isinstance(value, (int, float)) else str(value)
    return {"n": phi.n, "N": int(a.size), "s": args.s, "moment": out}, None


def cmd_decouple_check(args):
    cfg = norms.DecouplingCheckConfig(args.s, args.theta, args.c)
    rng = np.random.default_rng(args.seed)
    rows, violations = [], 0
    for trial in range(args.trials):
        N = int(rng.integers(1, args.X + 1))
        kind = "complex" if trial % 2 == 0 else "indicator"
        if kind == "complex":
            a = norms.random_complex(rng, N)
        else:
            a = (rng.random(N) < 0.5).astype(np.int64)
            a[int(rng.integers(N))] = 1
        r = norms.decoupling_check(PhiMap.moment_powers(N, args.n), a, cfg, workers=args.workers, seed=args.seed)
        violations += not r.holds
        rows.append((trial, kind, N, r.lhs, r.rhs, r.ratio, r.holds))
    report = {"decoupling": cfg.to_dict(), "n": args.n, "trials": args.trials, "violations": violations,
              "max_ratio": max((r[5] for r in rows), default=0.0), "seed": args.seed}
    if violations:
        raise Failure(report)
    return report, (["trial", "kind", "N", "lhs", "rhs", "ratio", "holds"], rows, [])


def cmd_lorentz_check(args):
    checks = norms.lorentz_sweep(args.trials, args.X, args.p, args.seed)
    rows = [(i // len(args.p), c.N, c.p, c.lhs, c.rhs, c.ratio, c.holds) for i, c in enumerate(checks)]
    violations = sum(not c.holds for c in checks)
    report = {"trials": args.trials, "N_max": args.X, "p": args.p, "violations": violations,
              "max_ratio": max(c.ratio for c in checks), "seed": args.seed}
    if violations:
        raise Failure(report)
    return report, (["trial", "N", "p", "lhs", "rhs", "ratio", "holds"], rows, [])


def cmd_det_scan(args):
    scan = curves.det_ratio_scan(_curve(args), args.delta, args.trials, args.seed)
    report = scan.to_dict()
    if not scan.ratio_min > 0:
        raise Failure(report)
    return report, None


def cmd_sigma_check(args):
    rng = np.random.default_rng(args.seed)
    curve = _curve(args)
    worst_mass, worst_id = 0.0, 0.0
    for _ in range(args.trials):
        spec = curves.SigmaSpec(tuple(np.sort(rng.random(args.m))))
        a = curves.sigma_mass(spec, "closed-form")
        b = curves.sigma_mass(spec, "recursive-quadrature")
        worst_mass = max(worst_mass, abs(a - b) / abs(a))
        if args.m <= min(curve.n, 3):
            worst_id = max(worst_id, curves.multilinear_identity_check(curve, spec.knots, args.m))
    report = {"m": args.m, "trials": args.trials, "c_m": str(curves.sigma_constant(args.m)),
              "max_mass_rel_err": worst_mass, "max_identity_residual": worst_id, "seed": args.seed}
    if worst_mass > 1e-6 or worst_id > 1e-4:
        raise Failure(report)
    return report, None


def _parse_pairs(text: str):
    return tuple(tuple(Fraction(v) for v in item.split(",")) for item in text.split(";") if item.strip())


def _frac_list(ivs):
    return [[str(a), str(b)] for a, b in ivs]


def cmd_sign_decomp(args):
    if args.family:
        fam = intervals.parse_family(Path(args.family).read_text())
    else:
        fam = intervals.SignedIntervalFamily(_parse_pairs(args.pairs))
    d = intervals.sign_decomposition(fam)
    report = {
        "n": fam.n,
        "xi": [[str(a), str(b), v] for a, b, v in d.xi.pieces()],
        "intervals": _frac_list(d.intervals),
        "signs": list(d.signs),
        "ell": d.ell,
        "reconstruction": intervals.reconstruction_holds(d, fam.n),
    }
    if args.pad and d.ell:
        p = intervals.pad_to_n(d, fam.n)
        report["padded"] = {"intervals": _frac_list(p.intervals), "signs": list(p.signs)}
    if not report["reconstruction"]:
        raise Failure(report)
    return report, None


def cmd_perm_lemma(args):
    counter = []
    configs = 0
    for xy in product(range(args.grid), repeat=2 * args.n):
        configs += 1
        try:
            intervals.theta_permutation_test(xy[: args.n], xy[args.n :])
        except InvariantViolation:
            counter.append(list(xy))
    report = {"n": args.n, "grid": args.grid, "configurations": configs, "counterexamples": counter}
    if counter:
        raise Failure(report)
    return report, None


def cmd_separation(args):
    curve = _curve(args)
    rep = intervals.separation_harness(curve, args.R, args.c0, args.delta0, args.trials, args.seed, workers=args.workers)
    report = rep.to_dict()
    if rep.violations and args.calibrate:
        report["calibrated_c0"] = intervals.calibrate_c0(curve, args.R, args.delta0, args.trials, args.seed, args.c0)
    elif rep.violations or rep.long_interval_failures:
        raise Failure(report)
    return report, None


def cmd_sqfn_probe(args):
    curve = _curve(args)
    if curve.n != 2:
        raise CountdecError("sqfn-probe supports n = 2 only")
    rng = np.random.default_rng(args.seed)
    ball = extension.BallWeight((0.0, 0.0), float(args.ball or args.R**2))
    rows, reports = [], []
    for k in range(args.trials):
        f = extension.DensityFunction.random(rng)
        probe = extension.run_probe(curve, f, args.R, ball, exponents=sorted({2 * args.m, args.p, 2}))
        sq = extension.square_function_from(probe, args.m)
        dec = extension.decoupling_from(probe, args.p)
        reports.append({"square_function": sq.to_dict(), "decoupling": dec.to_dict()})
        rows.append((args.R, k, args.m, sq.ratio))
    report = {"n": 2, "R": args.R, "m": args.m, "p": args.p, "trials": args.trials, "seed": args.seed,
              "max_ratio": max(r[3] for r in rows), "runs": reports}
    return report, (["R", "density", "m", "ratio"], rows, [])


def cmd_suite(args):
    ids = [int(v) for v in args.criteria.split(",")] if args.criteria else None
    results = suite.run_suite(ids, args.seed, args.workers,
                              progress=lambda r: print(r.line(), file=sys.stderr, flush=True))
    text = suite.suite_report(results, args.seed, args.workers)
    report = json.loads(text)
    if not report["all_passed"]:
        raise Failure(report)
    return report, None


# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *names: str) -> None:
    spec = {
        "n": dict(type=int, default=2, help="dimension / number of power-sum equations"),
        "s": dict(type=int, default=2, help="number of variables on each side"),
        "X": dict(type=int, default=50, help="range bound / length"),
        "p": dict(type=float, nargs="+", default=[1.25, 2.0, 3.0, 10.0], help="exponents"),
        "theta": dict(type=float, default=2.0),
        "c": dict(type=float, default=2.0),
        "R": dict(type=int, default=16),
        "c0": dict(type=float, default=10.0),
        "delta0": dict(type=float, default=1.0),
        "trials": dict(type=int, default=1000),
        "curve": dict(default="normalized-moment", choices=["normalized-moment", "standard-moment", "polynomial"]),
    }
    for name in names:
        p.add_argument(f"--{name}", **spec[name])


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="countdec", description=__doc__.split("\n")[0])
    parser.add_argument("--config", help="JSON file of default parameter values")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=DEFAULT_SEED)
    common.add_argument("--workers", type=int, default=1)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--out", help="write the report here instead of stdout")
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def add(name, func, help_, *common_names):
        p = sub.add_parser(name, parents=[common], help=help_)
        _add_common(p, *common_names)
        p.set_defaults(func=func)
        return p

    p = add("count", cmd_count, "count solutions J and diagonal solutions", "n", "s", "X")
    p.add_argument("--engine", choices=["auto", "bruteforce", "mitm"], default="auto")
    p.add_argument("--subset", help="comma/space separated elements of S (default 1..X)")
    p.add_argument("--phi-file", help="table of phi values, one 'j v1 .. vn' row per line")

    p = add("diagonal-check", cmd_diagonal_check, "check that s <= n admits only diagonal solutions", "n", "X")
    p.add_argument("--s", type=int, default=None, help="largest s to check (default n)")
    p.add_argument("--engine", choices=["auto", "bruteforce", "mitm"], default="auto")
    p.set_defaults(X=12)

    p = add("pte-search", cmd_pte_search, "search for an off-diagonal solution", "n", "s", "X")
    p.add_argument("--budget", type=int, default=10**7, help="maximum number of sides scanned")
    p.add_argument("--multisets", action="store_true", help="allow repeated entries within a side")
    p.set_defaults(s=3, X=7)

    p = add("amplify", cmd_amplify, "amplify a solution by x -> qx + h", "n", "s", "X")
    p.add_argument("--base", help="base solution as 'a,b,c|d,e,f' (default: searched)")
    p.add_argument("--search-max", type=int, default=12)
    p.set_defaults(s=3, X=100)

    p = add("moment", cmd_moment, "exact even moment of an exponential sum", "n", "s", "X")
    p.add_argument("--coeffs-file", help="one complex coefficient per line")
    p.add_argument("--random", action="store_true", help="random complex coefficients from --seed")
    p.add_argument("--phi-file")

    p = add("decouple-check", cmd_decouple_check, "discrete decoupling with the explicit constant",
            "n", "s", "X", "theta", "c", "trials")
    p.set_defaults(X=200, trials=200)

    p = add("lorentz-check", cmd_lorentz_check, "Lorentz versus l^p comparison sweep", "p", "X", "trials")
    p.set_defaults(X=10**4)

    p = add("det-scan", cmd_det_scan, "scan |det gamma'(u)| / Vandermonde(u)", "n", "curve", "trials")
    p.add_argument("--curve-file")
    p.add_argument("--delta", type=float, default=1.0)
    p.set_defaults(trials=10**4)

    p = add("sigma-check", cmd_sigma_check, "sigma mass and multilinear identity", "n", "curve", "trials")
    p.add_argument("--curve-file")
    p.add_argument("--m", type=int, default=2)
    p.set_defaults(n=3, trials=100)

    p = add("sign-decomp", cmd_sign_decomp, "sign-constant decomposition of a signed family")
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--family", help="file of 's_i t_i' rational pairs")
    g.add_argument("--pairs", help="inline pairs 's,t;s,t;...'")
    p.add_argument("--pad", action="store_true", help="also pad to exactly n intervals")

    p = add("perm-lemma", cmd_perm_lemma, "exhaustive Theta/permutation equivalence", "n")
    p.add_argument("--grid", type=int, default=5, help="endpoints range over 0..grid-1")
    p.set_defaults(n=3)

    p = add("separation", cmd_separation, "separation harness for non-permutation sums",
            "n", "R", "c0", "delta0", "trials", "curve")
    p.add_argument("--curve-file")
    p.add_argument("--calibrate", action="store_true", help="on violations, double c0 up to 40")
    p.set_defaults(trials=10**4)

    p = add("sqfn-probe", cmd_sqfn_probe, "square-function / decoupling probe (n = 2)", "R", "trials", "curve")
    p.add_argument("--curve-file")
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--p", type=int, default=4)
    p.add_argument("--ball", type=float, default=None, help="ball radius (default R^2)")
    p.set_defaults(R=4, trials=4, n=2)

    p = add("suite", cmd_suite, "run the acceptance suite")
    p.add_argument("--criteria", help="comma separated criterion ids (default all)")
    return parser


def _apply_config(parser: argparse.ArgumentParser, argv) -> None:
    pre = argparse.ArgumentParser(add_help=False)
    pre.add_argument("--config")
    known, _ = pre.parse_known_args(argv)
    if not known.config:
        return
    defaults = json.loads(Path(known.config).read_text())
    for action in parser._subparsers._group_actions:
        for p in action.choices.values():
            p.set_defaults(**{k.replace("-", "_"): v for k, v in defaults.items()})


def _render(report, table, fmt: str) -> str:
    if fmt == "csv" and table is not None:
        header, rows, summary = table
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        for k, v in summary:
            buf.write(f"# {k},{v}\n")
        return buf.getvalue()
    return json.dumps(report, sort_keys=True, indent=2) + "\n"


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        _apply_config(parser, argv)
    except (OSError, ValueError) as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return 2
    args = parser.parse_args(argv)
    code = 0
    try:
        report, table = args.func(args)
    except Failure as f:
        report, table, code = f.report, None, 1
    except _Refusal as r:
        report, table, code = r.report, None, 2
        print(f"refused: {r}", file=sys.stderr)
    except InvariantViolation as exc:
        print(f"invariant violated: {exc}", file=sys.stderr)
        return 1
    except (CountdecError, ValueError) as exc:
        print(f"refused: {exc}", file=sys.stderr)
        return 2
    if isinstance(report, dict) and args.command != "suite":
        report = {"command": args.command, "config": _config(args), **report}
    elif isinstance(report, dict):
        report = {"command": "suite", **report}
    text = _render(report, table, args.format)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
