"""Command-line interface: ``hypercc {geodesic,census,classify,verify,bounds}``.

Data goes to stdout (or ``--out``); diagnostics go to stderr.

Exit codes:
    0  success
    1  argument or input-file error
    2  geodesic solve failed to converge, or classify input has a collision
    3  inertia mismatch in ``geodesic``
    4  census bounds unmet or Morse audit inconsistent
    5  classify input is not a central configuration within tolerance
    6  a ``verify`` property failed
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys

import numpy as np

from .battery import run_battery
from .errors import CollisionError, HyperCCError, InertiaMismatch, NoConvergence
from .geodesic import enumerate_orderings, solve_geodesic
from .geometry import Configuration
from .hessian import constrained_hessian, spectrum
from .morse import census_report, geodesic_count, lower_bounds, poincare_polynomial
from .potential import cc_residual, force_function, lambda_value, min_pair_distance
from .search import SearchParams, canonicalize, census, classify

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NO_CONVERGENCE = 2
EXIT_COLLISION = 2
EXIT_INERTIA = 3
EXIT_BOUNDS = 4
EXIT_NOT_CC = 5
EXIT_PROPERTY = 6

log = logging.getLogger("hypercc")


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; this CLI reserves 2 for solver failures."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def parse_masses(text: str) -> np.ndarray:
    """``"1,1.3,0.8"`` or ``"equal:N"``."""
    text = text.strip()
    if text.startswith("equal:"):
        try:
            n = int(text[len("equal:"):])
        except ValueError:
            raise UsageError(f"bad mass string {text!r}") from None
        if n < 2:
            raise UsageError("equal:N needs N >= 2")
        return np.ones(n)
    try:
        masses = np.array([float(s) for s in text.split(",")])
    except ValueError:
        raise UsageError(f"bad mass list {text!r}") from None
    if len(masses) < 2:
        raise UsageError("need at least two masses")
    if not np.all(np.isfinite(masses)) or np.any(masses <= 0):
        raise UsageError("masses must be positive and finite")
    return masses


def _positive(name, value):
    if value is not None and not (math.isfinite(value) and value > 0):
        raise UsageError(f"{name} must be positive")
    return value


# -- output helpers -------------------------------------------------------

def _emit(args, text: str):
    if args.out:
        with open(args.out, "w", encoding="utf-8", newline="") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _json(payload) -> str:
    # float repr is the shortest string that round-trips the double exactly
    return json.dumps({"schema_version": SCHEMA_VERSION, **payload}, indent=2, allow_nan=True) + "\n"


def _spectrum_dict(sp):
    return {
        "eigenvalues": [float(e) for e in sp.eigenvalues],
        "index": sp.n_minus,
        "nullity": sp.n_zero,
        "n_plus": sp.n_plus,
        "zero_tolerance": sp.zero_tolerance,
        "marginal": sp.marginal,
    }


def _points_list(cfg: Configuration):
    return [{"x": float(p[0]), "y": float(p[1]), "w": float(p[2])} for p in cfg.points]


def _table(header, rows) -> str:
    rows = [[str(c) for c in r] for r in rows]
    widths = [max(len(h), *(len(r[k]) for r in rows)) if rows else len(h) for k, h in enumerate(header)]
    line = lambda cells: "  ".join(c.ljust(w) for c, w in zip(cells, widths)).rstrip()
    return "\n".join([line(header), line(["-" * w for w in widths])] + [line(r) for r in rows]) + "\n"


# -- geodesic -------------------------------------------------------------

def cmd_geodesic(args) -> int:
    masses = parse_masses(args.masses)
    c = _positive("--c", args.c)
    n = len(masses)
    expected = (n - 2, 1, n)
    records, code = [], EXIT_OK
    for ordering in enumerate_orderings(n):
        try:
            g = solve_geodesic(masses, ordering, c, tol=args.tol_residual)
        except NoConvergence as exc:
            print(f"no convergence for ordering {ordering}: {exc}", file=sys.stderr)
            code = EXIT_NO_CONVERGENCE
            continue
        sp = spectrum(constrained_hessian(g.configuration()), args.tol_zero)
        if sp.inertia != expected:
            print(f"ordering {ordering}: inertia {sp.inertia}, expected {expected}", file=sys.stderr)
            if code == EXIT_OK:
                code = EXIT_INERTIA
        records.append((g, sp))
    if args.format == "json":
        text = _json({
            "command": "geodesic",
            "masses": [float(m) for m in masses],
            "c": c,
            "expected_count": geodesic_count(n),
            "records": [{
                "ordering": list(g.ordering),
                "thetas": [float(t) for t in g.thetas],
                "lambda": g.lam,
                "residual": g.residual,
                "iterations": g.iterations,
                **_spectrum_dict(sp),
            } for g, sp in records],
        })
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["ordering", "lambda", "residual", "index", "nullity"] + [f"theta{i}" for i in range(n)])
        for g, sp in records:
            w.writerow([" ".join(map(str, g.ordering)), repr(g.lam), repr(g.residual), sp.n_minus, sp.n_zero]
                       + [repr(float(t)) for t in g.thetas])
        text = buf.getvalue()
    else:
        rows = [(" ".join(map(str, g.ordering)), f"{g.lam:.12g}", f"{g.residual:.2e}", sp.n_minus, sp.n_zero,
                 " ".join(f"{t:.9f}" for t in g.thetas)) for g, sp in records]
        text = _table(["ordering", "lambda", "residual", "index", "nullity", "thetas"], rows)
        text += f"{len(records)} of {geodesic_count(n)} geodesic classes solved\n"
    _emit(args, text)
    return code


# -- census ---------------------------------------------------------------

def cmd_census(args) -> int:
    masses = parse_masses(args.masses)
    c = _positive("--c", args.c)
    if args.trials < 0:
        raise UsageError("--trials must be nonnegative")
    params = SearchParams(trials=args.trials, seed=args.seed, tol_residual=args.tol_residual, tol_zero=args.tol_zero)
    result = census(masses, c, params)
    rep = census_report(result.records, masses, c)
    n = rep.n
    if result.failures:
        print("failed trials: " + ", ".join(f"{k} {v}" for k, v in sorted(result.failures.items())), file=sys.stderr)
    if args.format == "json":
        text = _json({
            "command": "census",
            "masses": rep.masses,
            "c": rep.c,
            "trials": params.trials,
            "seed": params.seed,
            "converged_trials": result.converged_trials,
            "classes": [{
                "class_id": k,
                "is_geodesic": r.is_geodesic,
                "ordering": None if r.ordering is None else list(r.ordering),
                "lambda": r.lam,
                "U": r.U_value,
                "residual": r.residual,
                "min_distance": r.min_distance,
                "points": _points_list(r.configuration),
                **_spectrum_dict(r.spectrum),
            } for k, r in enumerate(rep.records)],
            "morse_polynomial": list(rep.M.coeffs),
            "poincare_polynomial": list(rep.P.coeffs),
            "audit": {
                "R": None if rep.audit.R is None else list(rep.audit.R.coeffs),
                "remainder": rep.audit.remainder,
                "division_exact": rep.audit.division_exact,
                "R_nonnegative": rep.audit.R_nonnegative,
                "degenerate_classes": rep.audit.degenerate_classes,
                "verdict": rep.audit.verdict,
            },
            "bounds": {
                "total": rep.bounds[0],
                "non_geodesic": rep.bounds[1],
                "found_total": rep.found_total,
                "found_non_geodesic": rep.found_non_geodesic,
                "met": rep.bounds_met,
            },
            "geodesic": {"found": rep.found_geodesic, "expected": rep.expected_geodesic},
        })
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        coords = [f"{a}{i}" for i in range(n) for a in ("x", "y", "w")]
        w.writerow(["class_id", "is_geodesic", "ordering", "lambda", "U", "residual", "index", "nullity"] + coords)
        for k, r in enumerate(rep.records):
            w.writerow([k, int(r.is_geodesic), "" if r.ordering is None else " ".join(map(str, r.ordering)),
                        repr(r.lam), repr(r.U_value), repr(r.residual), r.index, r.nullity]
                       + [repr(float(v)) for v in r.configuration.points.ravel()])
        text = buf.getvalue()
    else:
        rows = [(k, "yes" if r.is_geodesic else "no", "" if r.ordering is None else " ".join(map(str, r.ordering)),
                 f"{r.lam:.12g}", f"{r.U_value:.12g}", f"{r.residual:.2e}", r.index, r.nullity)
                for k, r in enumerate(rep.records)]
        text = _table(["class", "geodesic", "ordering", "lambda", "U", "residual", "index", "nullity"], rows)
        text += (
            f"trials {params.trials}, converged {result.converged_trials}, classes {rep.found_total}\n"
            f"M(t) = {rep.M}\nP(t) = {rep.P}\n"
            f"R(t) = {rep.audit.R if rep.audit.R is not None else f'(remainder {rep.audit.remainder})'}\n"
            f"audit: {rep.audit.verdict}\n"
            f"lower bounds: total {rep.found_total} >= {rep.bounds[0]}: {rep.total_bound_met}; "
            f"non-geodesic {rep.found_non_geodesic} >= {rep.bounds[1]}: {rep.non_geodesic_bound_met}\n"
            f"geodesic classes: {rep.found_geodesic} of {rep.expected_geodesic}\n"
        )
    _emit(args, text)
    if not rep.bounds_met:
        print("lower bounds unmet; more trials may find the missing classes", file=sys.stderr)
        return EXIT_BOUNDS
    if not (rep.audit.valid and rep.audit.census_complete_hypothesis):
        print(f"Morse audit: {rep.audit.verdict}", file=sys.stderr)
        return EXIT_BOUNDS
    return EXIT_OK


# -- classify -------------------------------------------------------------

def load_configuration(path: str) -> Configuration:
    """JSON ``{masses, points: [{x, y, w}]}`` or ``{masses, chart: [{theta, phi}]}``."""
    try:
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
    except (OSError, json.JSONDecodeError) as exc:
        raise UsageError(f"cannot read {path}: {exc}") from None
    if not isinstance(data, dict) or "masses" not in data:
        raise UsageError("configuration file needs a 'masses' field")
    try:
        masses = np.array([float(m) for m in data["masses"]])
        if "points" in data:
            pts = np.array([[float(p["x"]), float(p["y"]), float(p["w"])] for p in data["points"]])
            return Configuration(pts, masses)
        if "chart" in data:
            th = [float(p["theta"]) for p in data["chart"]]
            ph = [float(p["phi"]) for p in data["chart"]]
            return Configuration.from_chart(th, ph, masses)
    except (KeyError, TypeError, ValueError) as exc:
        raise UsageError(f"bad configuration file: {exc}") from None
    raise UsageError("configuration file needs 'points' or 'chart'")


def cmd_classify(args) -> int:
    cfg = load_configuration(args.file)
    try:
        dmin = min_pair_distance(cfg)
        residual = cc_residual(cfg)
        lam = lambda_value(cfg)
    except CollisionError as exc:
        print(f"collision: {exc}", file=sys.stderr)
        return EXIT_COLLISION
    sp, is_geo = classify(canonicalize(cfg), args.tol_zero)
    is_cc = residual < args.tol_residual
    payload = {
        "command": "classify",
        "residual": residual,
        "lambda": lam,
        "U": force_function(cfg),
        "min_distance": dmin,
        "is_cc": is_cc,
        "is_geodesic": is_geo,
        **_spectrum_dict(sp),
    }
    if args.format == "json":
        text = _json(payload)
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        keys = ["residual", "lambda", "U", "min_distance", "is_cc", "is_geodesic", "index", "nullity", "n_plus"]
        w.writerow(keys)
        w.writerow([repr(payload[k]) if isinstance(payload[k], float) else int(payload[k]) for k in keys])
        text = buf.getvalue()
    else:
        text = (
            f"residual    {residual:.3e}\nlambda      {lam:.15g}\nU           {payload['U']:.15g}\n"
            f"geodesic    {'yes' if is_geo else 'no'}\nindex       {sp.n_minus}\nnullity     {sp.n_zero}\n"
            f"n_plus      {sp.n_plus}\neigenvalues {' '.join(f'{e:.6g}' for e in sp.eigenvalues)}\n"
        )
    _emit(args, text)
    if not is_cc:
        print(f"not a central configuration: residual {residual:.3e} >= {args.tol_residual:.1e}", file=sys.stderr)
        return EXIT_NOT_CC
    if not sp.nondegenerate:
        print("warning: degenerate critical point (nullity != 1)", file=sys.stderr)
    return EXIT_OK


# -- verify ---------------------------------------------------------------

def cmd_verify(args) -> int:
    if args.n < 2:
        raise UsageError("--n must be at least 2")
    if args.cases < 0:
        raise UsageError("--cases must be nonnegative")
    if args.cases == 0:
        print("warning: --cases 0 checks nothing; passing vacuously", file=sys.stderr)
    result = run_battery(args.n, args.cases, args.seed)
    tallies = list(result.tallies.values())
    if args.format == "json":
        text = _json({
            "command": "verify",
            "n": result.n,
            "cases": result.cases,
            "seed": result.seed,
            "checks": [{"name": t.name, "passed": t.passed, "failed": t.failed, "first_failure": t.first_failure}
                       for t in tallies],
            "ok": result.ok,
        })
    elif args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["check", "passed", "failed", "status"])
        for t in tallies:
            w.writerow([t.name, t.passed, t.failed, "pass" if t.ok else "FAIL"])
        text = buf.getvalue()
    else:
        text = _table(["check", "passed", "failed", "status"],
                      [(t.name, t.passed, t.failed, "pass" if t.ok else "FAIL") for t in tallies])
    _emit(args, text)
    for t in tallies:
        if not t.ok:
            print(f"{t.name}: {t.first_failure}", file=sys.stderr)
    return EXIT_OK if result.ok else EXIT_PROPERTY


# -- bounds ---------------------------------------------------------------

def cmd_bounds(args) -> int:
    n = args.n
    if n < 2:
        raise UsageError("--n must be at least 2")
    total, non_geo = lower_bounds(n)
    P = poincare_polynomial(n)
    if args.format == "json":
        text = _json({"command": "bounds", "n": n, "total": total, "non_geodesic": non_geo,
                      "geodesic": geodesic_count(n), "poincare_polynomial": list(P.coeffs),
                      "poincare_text": P.format()})
    elif args.format == "csv":
        text = f"n,total,non_geodesic,geodesic,poincare\n{n},{total},{non_geo},{geodesic_count(n)},{P.format()}\n"
    else:
        text = (f"total        {total}\nnon_geodesic {non_geo}\ngeodesic     {geodesic_count(n)}\n"
                f"P(t)         {P.format()}\n")
    _emit(args, text)
    return EXIT_OK


# -- parser ---------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="text")
    common.add_argument("--out", help="write data here instead of stdout")
    common.add_argument("-v", "--verbose", action="store_true", help="debug logging on stderr")

    system = argparse.ArgumentParser(add_help=False)
    system.add_argument("--masses", required=True, help='comma-separated masses or "equal:N"')
    system.add_argument("--c", type=float, default=1.0, help="level of the moment of inertia (default 1)")

    def tol(residual=1e-9):
        # a fresh parent per subcommand: parent actions are shared objects
        t = argparse.ArgumentParser(add_help=False)
        t.add_argument("--tol-residual", type=float, default=residual)
        t.add_argument("--tol-zero", type=float, default=None, help="zero-eigenvalue threshold (default relative 1e-7)")
        return t

    p = _Parser(prog="hypercc", description="Central configurations of the N-body problem on H^2.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("geodesic", parents=[common, system, tol(1e-10)], help="solve all N!/2 geodesic CCs")
    g.set_defaults(func=cmd_geodesic)

    s = sub.add_parser("census", parents=[common, system, tol()], help="random multistart census with Morse audit")
    s.add_argument("--trials", type=int, default=2000)
    s.add_argument("--seed", type=int, default=0)
    s.set_defaults(func=cmd_census)

    k = sub.add_parser("classify", parents=[common, tol()], help="residual and spectrum of a configuration file")
    k.add_argument("file", help="JSON configuration file")
    k.set_defaults(func=cmd_classify)

    v = sub.add_parser("verify", parents=[common], help="randomized property battery")
    v.add_argument("--n", type=int, default=4)
    v.add_argument("--cases", type=int, default=20)
    v.add_argument("--seed", type=int, default=0)
    v.set_defaults(func=cmd_verify)

    b = sub.add_parser("bounds", parents=[common], help="lower bounds and the Poincare polynomial")
    b.add_argument("--n", type=int, required=True)
    b.set_defaults(func=cmd_bounds)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        for name in ("tol_residual", "tol_zero"):
            _positive("--" + name.replace("_", "-"), getattr(args, name, None))
        return args.func(args)
    except UsageError as exc:
        print(f"hypercc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except InertiaMismatch as exc:
        print(f"hypercc: {exc}", file=sys.stderr)
        return EXIT_INERTIA
    except HyperCCError as exc:
        print(f"hypercc: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ValueError as exc:
        print(f"hypercc: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
