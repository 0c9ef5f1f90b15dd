"""Command-line front end: JSON specs in, JSON/CSV reports out."""

from __future__ import annotations

import argparse
import csv
import json
import sys
import time
from fractions import Fraction

import numpy as np

from . import __version__, fibration, invariants, jsonio, solvers, toricmetrics
from .errors import MaxIterations, TorickstabError
from .jsonio import SchemaError
from .polynomial import Polynomial
from .polytope import AffineFunction
from .quadrature import integrate_boundary, integrate_poly, integrate_weighted
from .weights import WeightFn, soliton_weight_pair

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def _load_json(arg: str, path: str):
    """Accept inline JSON or a file path."""
    text = arg.strip()
    if not (text.startswith("{") or text.startswith("[") or text[:1].isdigit()
            or text.startswith('"') or text.startswith("-")):
        try:
            with open(arg) as f:
                text = f.read()
        except OSError as e:
            raise SchemaError(path, f"cannot read {arg!r}: {e}")
    try:
        return json.loads(text)
    except json.JSONDecodeError as e:
        raise SchemaError(path, f"invalid JSON: {e}")


def _report(command, inputs, results, normalization=None, started=None):
    out = {
        "command": command,
        "version": __version__,
        "inputs": inputs,
        "results": results,
    }
    if normalization is not None:
        out["normalization"] = normalization
    out["timings"] = {"seconds": round(time.monotonic() - started, 6) if started else 0.0}
    return out


def _emit(report, args) -> None:
    text = json.dumps(report, indent=2, sort_keys=False)
    if getattr(args, "out", None):
        with open(args.out, "w") as f:
            f.write(text + "\n")
    else:
        print(text)


def _write_trace_csv(path, result):
    with open(path, "w", newline="") as f:
        writer = csv.writer(f)
        dim = len(result.xi0)
        writer.writerow(["iteration"] + [f"xi{i + 1}" for i in range(dim)]
                        + ["objective", "step"])
        for it, (xi, obj, step) in enumerate(result.trace):
            writer.writerow([it] + [repr(float(z)) for z in xi]
                            + [repr(float(obj)), repr(float(step))])


def _affine_basis(dim):
    return [AffineFunction.constant(dim, 1)] + [
        AffineFunction.coordinate(dim, i) for i in range(dim)
    ]


# -- commands ----------------------------------------------------------------------


def cmd_polytope_info(args):
    started = time.monotonic()
    p = jsonio.polytope_from_json(_load_json(args.polytope, "polytope"))
    facets = []
    for h, facet in p.facets():
        facets.append({
            "normal": [int(c) for c in h.normal],
            "offset": jsonio.num_to_json(h.offset),
            "sigma_mass": jsonio.num_to_json(facet.sigma_measure()),
        })
    results = {
        "dim": p.dim,
        "vertices": [[jsonio.num_to_json(c) for c in v] for v in p.vertices],
        "volume": jsonio.num_to_json(p.volume()),
        "canonical_fano": p.is_canonical_fano(),
        "facets": facets,
    }
    _emit(_report("polytope-info", {"polytope": jsonio.polytope_to_json(p)},
                  results, started=started), args)
    return EXIT_OK


def cmd_futaki(args):
    started = time.monotonic()
    p = jsonio.polytope_from_json(_load_json(args.polytope, "polytope"))
    v = jsonio.weight_from_json(_load_json(args.v, "v"), p.dim, "v")
    w = jsonio.weight_from_json(_load_json(args.w, "w"), p.dim, "w")
    if args.all_affine:
        directions = _affine_basis(p.dim)
    elif args.direction is not None:
        directions = [jsonio.affine_from_json(
            _load_json(args.direction, "direction"), p.dim, "direction")]
    else:
        raise SchemaError("direction", "need --direction or --all-affine")
    rows = []
    for ell in directions:
        row = {"boundary": jsonio.futaki_report_to_json(
            invariants.futaki_boundary(p, v, w, ell, tol=args.tol,
                                       normalization=args.normalization))}
        if p.is_canonical_fano():
            # closed form applies on canonical Fano data with the soliton pairing
            zeta = list(ell.zeta)
            row["fano_closed_form"] = jsonio.futaki_report_to_json(
                invariants.futaki_fano(p, v, zeta, normalization=args.normalization,
                                       tol=args.tol))
        rows.append(row)
    _emit(_report("futaki", {
        "polytope": jsonio.polytope_to_json(p),
        "v": jsonio.weight_to_json(v),
        "w": jsonio.weight_to_json(w),
    }, rows, normalization=args.normalization, started=started), args)
    return EXIT_OK


def cmd_extremal(args):
    started = time.monotonic()
    p = jsonio.polytope_from_json(_load_json(args.polytope, "polytope"))
    v = jsonio.weight_from_json(_load_json(args.v, "v"), p.dim, "v")
    w0 = jsonio.weight_from_json(_load_json(args.w0, "w0"), p.dim, "w0")
    extra = None
    if args.extra_source is not None:
        extra = jsonio.weight_from_json(
            _load_json(args.extra_source, "extra_source"), p.dim, "extra_source")
    result = invariants.extremal_affine(p, v, w0, extra_source=extra, tol=args.tol)
    _emit(_report("extremal", {
        "polytope": jsonio.polytope_to_json(p),
        "v": jsonio.weight_to_json(v),
        "w0": jsonio.weight_to_json(w0),
    }, jsonio.extremal_to_json(result), started=started), args)
    return EXIT_OK


def _solver_inputs(args):
    """Resolve (polytope, weight, inputs-echo) from --polytope/--weight or --fibration."""
    if args.fibration is not None:
        spec = jsonio.fibration_from_json(_load_json(args.fibration, "fibration"))
        fibration.validate(spec)
        p = spec.fiber
        weight = fibration.fibration_weight(spec)
        if args.v is not None:
            weight = weight * jsonio.weight_from_json(
                _load_json(args.v, "v"), p.dim, "v")
        echo = {"fibration": jsonio.fibration_to_json(spec)}
        n_base = sum(f.n for f, _, _ in spec.factors)
        return p, weight, echo, n_base
    if args.polytope is None or args.weight is None:
        raise SchemaError("inputs", "need --polytope and --weight, or --fibration")
    p = jsonio.polytope_from_json(_load_json(args.polytope, "polytope"))
    weight = jsonio.weight_from_json(_load_json(args.weight, "weight"), p.dim, "weight")
    echo = {"polytope": jsonio.polytope_to_json(p),
            "weight": jsonio.weight_to_json(weight)}
    return p, weight, echo, 0


def cmd_soliton(args):
    started = time.monotonic()
    p, weight, echo, _ = _solver_inputs(args)
    try:
        result = solvers.tian_zhu_soliton(p, weight, tol=args.tol,
                                          max_iter=args.max_iter)
    except MaxIterations as e:
        _emit(_report("soliton", echo, {
            "error": str(e),
            "partial": jsonio.solver_result_to_json(e.result) if e.result else None,
        }, started=started), args)
        return EXIT_SOLVER
    if args.csv:
        _write_trace_csv(args.csv, result)
    _emit(_report("soliton", echo, jsonio.solver_result_to_json(result),
                  started=started), args)
    return EXIT_OK


def cmd_reeb(args):
    started = time.monotonic()
    p, weight, echo, n_base = _solver_inputs(args)
    s = args.s if args.s is not None else p.dim + n_base + 1
    echo["s"] = s
    try:
        result = solvers.msy_reeb(p, weight, s, tol=args.tol, max_iter=args.max_iter)
    except MaxIterations as e:
        _emit(_report("reeb", echo, {
            "error": str(e),
            "partial": jsonio.solver_result_to_json(e.result) if e.result else None,
        }, started=started), args)
        return EXIT_SOLVER
    if args.csv:
        _write_trace_csv(args.csv, result)
    _emit(_report("reeb", echo, jsonio.solver_result_to_json(result),
                  started=started), args)
    return EXIT_OK


def _parse_factor(text: str) -> fibration.BaseFactor:
    fields = {}
    for part in text.split(","):
        key, _, value = part.partition("=")
        fields[key.strip()] = value.strip()
    if "n" not in fields:
        raise SchemaError("factor", f"factor {text!r} needs n=<dim>")
    n = int(fields["n"])
    if "k" in fields:
        return fibration.BaseFactor(n, k=int(fields["k"]))
    if "s" in fields:
        return fibration.BaseFactor(n, s=Fraction(fields["s"]))
    raise SchemaError("factor", f"factor {text!r} needs k=<int> or s=<value>")


def cmd_fibration(args):
    started = time.monotonic()
    if args.subcommand == "enumerate":
        fiber = jsonio.polytope_from_json(_load_json(args.fiber, "fiber"))
        factors = [_parse_factor(t) for t in args.factor]
        if not factors:
            raise SchemaError("factor", "enumerate needs at least one --factor")
        tuples = fibration.enumerate_fano(fiber, factors)
        results = {
            "count": len(tuples),
            "tuples": [[list(p_a) for p_a in combo] for combo in tuples],
        }
        _emit(_report("fibration enumerate", {
            "fiber": jsonio.polytope_to_json(fiber),
            "factors": [{"n": f.n, "k": int(f.k)} for f in factors],
        }, results, started=started), args)
        return EXIT_OK

    spec = jsonio.fibration_from_json(_load_json(args.spec, "spec"))
    echo = {"fibration": jsonio.fibration_to_json(spec)}
    if args.subcommand == "validate":
        fibration.validate(spec)
        results = {"admissible": True}
        if all(f.is_fano for f, _, _ in spec.factors) and spec.fiber.is_canonical_fano():
            results["fano"] = fibration.fano_check(spec)
        _emit(_report("fibration validate", echo, results, started=started), args)
        return EXIT_OK
    if args.subcommand == "weights":
        fw = fibration.extremal_fibration_weights(spec, tol=args.tol)
        results = {
            "p": jsonio.weight_to_json(fw.p),
            "q": jsonio.weight_to_json(fw.q),
            "w_tilde": jsonio.weight_to_json(fw.w_tilde),
            "ell_ext": jsonio.affine_to_json(fw.ell_ext),
            "residuals": list(fw.residuals),
        }
        _emit(_report("fibration weights", echo, results, started=started), args)
        return EXIT_OK
    if args.subcommand in ("soliton", "reeb"):
        v = 1
        if args.v is not None:
            v = jsonio.weight_from_json(_load_json(args.v, "v"), spec.fiber.dim, "v")
        try:
            result = fibration.pv_soliton_pipeline(
                spec, v, tol=args.tol, max_iter=args.max_iter,
                reeb=args.subcommand == "reeb", s=args.s)
        except MaxIterations as e:
            _emit(_report(f"fibration {args.subcommand}", echo, {
                "error": str(e),
                "partial": jsonio.solver_result_to_json(e.result) if e.result else None,
            }, started=started), args)
            return EXIT_SOLVER
        if args.csv:
            _write_trace_csv(args.csv, result)
        _emit(_report(f"fibration {args.subcommand}", echo,
                      jsonio.solver_result_to_json(result), started=started), args)
        return EXIT_OK
    raise SchemaError("subcommand", f"unknown fibration subcommand {args.subcommand!r}")


# -- verification suites --------------------------------------------------------------


def _interval():
    return jsonio.polytope_from_json(
        {"facets": [{"normal": [1], "offset": 1}, {"normal": [-1], "offset": 1}]})


def _p2():
    return jsonio.polytope_from_json({"facets": [
        {"normal": [1, 0], "offset": 1},
        {"normal": [0, 1], "offset": 1},
        {"normal": [-1, -1], "offset": 1},
    ]})


def _suite_quadrature():
    import math

    rows = []

    def check(name, residual, tol):
        rows.append({"check": name, "residual": float(residual), "tol": tol,
                     "pass": bool(abs(residual) <= tol)})

    interval, p2 = _interval(), _p2()
    r = integrate_weighted(interval, WeightFn.exp_affine([1], 0))
    check("interval exp(x) vs 2 sinh 1", r.value - 2 * math.sinh(1.0), 1e-11)
    r = integrate_weighted(
        interval, WeightFn.affine_power(AffineFunction([1], 2), -3))
    check("interval (x+2)^-3 vs 4/9", r.value - 4.0 / 9.0, 1e-11)
    f = Polynomial(2, {(2, 1): Fraction(3), (1, 0): Fraction(-2), (0, 0): Fraction(1)})
    lhs = integrate_boundary(p2, WeightFn.from_polynomial(f)).exact
    rhs = integrate_poly(p2, f.scale(2)
                         + Polynomial.linear([1, 0]) * f.partial(0)
                         + Polynomial.linear([0, 1]) * f.partial(1))
    check("divergence identity on canonical Fano", float(lhs - rhs), 0.0)
    # deterministic Monte Carlo cross-check
    rng = np.random.default_rng(20240817)
    w = WeightFn.exp_affine([Fraction(1, 2), Fraction(1, 5)], 0)
    pts = rng.random((200000, 2)) * 3.0 - 1.0  # box [-1,2]^2 covering the simplex
    inside = pts.sum(axis=1) <= 1.0
    mc = w.eval(pts[inside]).sum() / len(pts) * 9.0
    r = integrate_weighted(p2, w)
    check("quadrature vs Monte Carlo (2e5 samples)", r.value - mc, 2e-2)
    return rows


def _suite_futaki(grid_resolution):
    rows = []
    interval, p2 = _interval(), _p2()
    cases = [
        ("P1 v=1", interval, WeightFn.constant(1, 1), 1),
        ("P1 v=x+2", interval,
         WeightFn.affine_power(AffineFunction([1], 2), 1), 1),
        ("P1 v=exp(0.3x)", interval,
         WeightFn.exp_affine([Fraction(3, 10)], 0), 1),
        ("P2 v=1", p2, WeightFn.constant(2, 1), 2),
        ("P2 v=x1+2", p2,
         WeightFn.affine_power(AffineFunction([1, 0], 2), 1), 2),
        ("P2 v=exp(0.3x1)", p2,
         WeightFn.exp_affine([Fraction(3, 10), 0], 0), 2),
    ]
    for name, p, v, m in cases:
        vv, ww = soliton_weight_pair(v, m)
        u = toricmetrics.SymplecticPotential(p)
        grid = toricmetrics.GridSpec(resolution=grid_resolution)
        for d, ell in enumerate(_affine_basis(p.dim)):
            fb = invariants.futaki_boundary(p, vv, ww, ell)
            zeta = list(ell.zeta) if not ell.is_constant() else [0] * p.dim
            ff = invariants.futaki_fano(p, vv, zeta)
            fn = toricmetrics.futaki_numeric(p, u, vv, ww, ell, grid)
            rows.append({"check": f"{name} dir {d}: boundary vs closed form",
                         "residual": abs(fb.value - ff.value), "tol": 1e-6,
                         "pass": bool(abs(fb.value - ff.value) <= 1e-6)})
            rows.append({"check": f"{name} dir {d}: boundary vs metric numeric",
                         "residual": abs(fb.value - fn.value), "tol": 1e-3,
                         "pass": bool(abs(fb.value - fn.value) <= 1e-3)})
    return rows


def _suite_identities():
    rows = []
    interval, p2 = _interval(), _p2()
    u1 = toricmetrics.SymplecticPotential(interval)
    xs = np.linspace(-0.95, 0.95, 21)[:, None]
    res = float(np.max(np.abs(toricmetrics.scal(u1, xs, h=1e-3) - 2.0)))
    rows.append({"check": "P1 Guillemin Scal = 2", "residual": res, "tol": 1e-8,
                 "pass": bool(res <= 1e-8)})
    u2 = toricmetrics.scaled_bump(
        p2, Polynomial(2, {(4, 0): Fraction(1, 20), (2, 2): Fraction(1, 30)}))
    rng = np.random.default_rng(7)
    pts = []
    while len(pts) < 50:
        x = rng.random(2) * 3.0 - 1.0
        if u2.facet_values(x).min() > 0.05:
            pts.append(x)
    pts = np.array(pts)
    v = WeightFn.exp_affine([Fraction(3, 10), Fraction(1, 10)], 0)
    d = toricmetrics.scal_v_direct(u2, v, pts, h=2.5e-4)
    g = toricmetrics.scal_v_divergence(u2, v, pts, h=2.5e-4)
    res = float(np.max(np.abs(d - g)))
    rows.append({"check": "scal_v direct vs divergence (bump metric)",
                 "residual": res, "tol": 1e-6, "pass": bool(res <= 1e-6)})
    spec = fibration.FibrationSpec(
        interval, [(fibration.BaseFactor(1, k=2), (1,), 2)])
    fw = fibration.extremal_fibration_weights(spec)
    sample = np.linspace(-0.9, 0.9, 11)[:, None]
    lhs = fw.w_tilde.eval(sample)
    rhs = fw.p.eval(sample) * (fw.ell_ext.eval(sample) - fw.q.eval(sample))
    res = float(np.max(np.abs(lhs - rhs)))
    rows.append({"check": "w_tilde = p (ell_ext - q) pointwise",
                 "residual": res, "tol": 1e-12, "pass": bool(res <= 1e-12)})
    return rows


def cmd_verify(args):
    started = time.monotonic()
    suites = {
        "quadrature": lambda: _suite_quadrature(),
        "futaki": lambda: _suite_futaki(args.grid),
        "identities": lambda: _suite_identities(),
    }
    if args.suite == "all":
        names = list(suites)
    elif args.suite in suites:
        names = [args.suite]
    else:
        raise SchemaError("suite", f"unknown suite {args.suite!r}; "
                                   f"choose from {sorted(suites)} or 'all'")
    rows = []
    for name in names:
        for row in suites[name]():
            row["suite"] = name
            rows.append(row)
    ok = all(row["pass"] for row in rows)
    _emit(_report("verify", {"suite": args.suite},
                  {"all_pass": ok, "checks": rows}, started=started), args)
    return EXIT_OK if ok else EXIT_VALIDATION


# -- parser -----------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="torickstab",
        description="Weighted Futaki invariants, soliton/Reeb solvers and "
                    "Fano fibration enumeration on Delzant polytopes.",
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(sp, solver=False):
        sp.add_argument("--tol", type=float,
                        default=1e-10 if solver else 1e-12)
        sp.add_argument("--out", help="write the JSON report to a file")
        if solver:
            sp.add_argument("--max-iter", type=int, default=100)
            sp.add_argument("--csv", help="write the iteration trace as CSV")

    sp = sub.add_parser("polytope-info", help="vertices, volume, boundary measure")
    sp.add_argument("--polytope", required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_polytope_info)

    sp = sub.add_parser("futaki", help="weighted Futaki invariant")
    sp.add_argument("--polytope", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--w", required=True)
    sp.add_argument("--direction")
    sp.add_argument("--all-affine", action="store_true")
    sp.add_argument("--normalization", choices=["polytope", "symplectic"],
                    default="polytope")
    common(sp)
    sp.set_defaults(func=cmd_futaki)

    sp = sub.add_parser("extremal", help="extremal affine function")
    sp.add_argument("--polytope", required=True)
    sp.add_argument("--v", required=True)
    sp.add_argument("--w0", required=True)
    sp.add_argument("--extra-source")
    common(sp)
    sp.set_defaults(func=cmd_extremal)

    for name, func in (("soliton", cmd_soliton), ("reeb", cmd_reeb)):
        sp = sub.add_parser(name, help=f"{name} solver")
        sp.add_argument("--polytope")
        sp.add_argument("--weight")
        sp.add_argument("--fibration")
        sp.add_argument("--v")
        if name == "reeb":
            sp.add_argument("--s", type=float)
        common(sp, solver=True)
        sp.set_defaults(func=func)

    sp = sub.add_parser("fibration", help="fibration spec operations")
    sp.add_argument("subcommand",
                    choices=["validate", "weights", "enumerate", "soliton", "reeb"])
    sp.add_argument("--spec")
    sp.add_argument("--fiber")
    sp.add_argument("--factor", action="append", default=[],
                    help="e.g. n=1,k=2 (repeatable)")
    sp.add_argument("--v")
    sp.add_argument("--s", type=float)
    common(sp, solver=True)
    sp.set_defaults(func=cmd_fibration)

    sp = sub.add_parser("verify", help="oracle cross-check suites")
    sp.add_argument("suite",
                    choices=["quadrature", "futaki", "identities", "all"])
    sp.add_argument("--grid", type=int, default=100,
                    help="points-per-axis equivalent for the metric oracle")
    sp.add_argument("--margin", type=float, default=1e-3)
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except MaxIterations as e:
        print(json.dumps({"error": str(e)}), file=sys.stderr)
        return EXIT_SOLVER
    except (SchemaError, TorickstabError, ValueError) as e:
        print(json.dumps({"error": f"{type(e).__name__}: {e}"}), file=sys.stderr)
        return EXIT_VALIDATION


if __name__ == "__main__":
    sys.exit(main())
