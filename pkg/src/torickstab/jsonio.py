"""JSON (de)serialization for polytopes, weights, fibration specs and reports.

Rationals are written as "p/q" strings so round-trips stay exact; small
polynomial expressions like "x+2" or "3*x1*x2^2 - 1/2" are accepted wherever
a polynomial is expected.
"""

from __future__ import annotations

import ast
from fractions import Fraction

from .exactlinalg import frac
from .fibration import BaseFactor, FibrationSpec
from .invariants import ExtremalFunction, FutakiReport
from .polynomial import Polynomial
from .polytope import AffineFunction, DelzantPolytope, HalfSpace
from .solvers import SolverResult
from .weights import WeightFn, WeightSum


class SchemaError(ValueError):
    """Malformed JSON input; carries the offending schema path."""

    def __init__(self, path, message):
        super().__init__(f"{path}: {message}")
        self.path = path


def num_to_json(x):
    if isinstance(x, Fraction):
        return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"
    return x


def num_from_json(obj, path="value") -> Fraction:
    try:
        return frac(obj)
    except (ValueError, TypeError, ZeroDivisionError) as e:
        raise SchemaError(path, f"not a number or 'p/q' string: {obj!r} ({e})")


# -- polynomial expressions ----------------------------------------------------


def parse_poly(expr: str, dim: int) -> Polynomial:
    """Parse expressions in x (1-D) or x1..x{dim} into an exact polynomial."""
    try:
        tree = ast.parse(expr.replace("^", "**"), mode="eval")
    except SyntaxError as e:
        raise SchemaError("poly", f"cannot parse {expr!r}: {e}")
    return _poly_node(tree.body, expr, dim)


def _poly_node(node, expr, dim) -> Polynomial:
    if isinstance(node, ast.Constant):
        return Polynomial.constant(dim, frac(node.value))
    if isinstance(node, ast.Name):
        name = node.id
        if name == "x" and dim == 1:
            idx = 0
        elif name.startswith("x") and name[1:].isdigit():
            idx = int(name[1:]) - 1
        else:
            raise SchemaError("poly", f"unknown variable {name!r} in {expr!r}")
        if not 0 <= idx < dim:
            raise SchemaError("poly", f"variable {name!r} out of range for dim {dim}")
        return Polynomial.monomial(dim, tuple(1 if i == idx else 0 for i in range(dim)))
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.USub, ast.UAdd)):
        inner = _poly_node(node.operand, expr, dim)
        return inner.scale(-1) if isinstance(node.op, ast.USub) else inner
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _poly_node(node.left, expr, dim)
            if not (isinstance(node.right, ast.Constant) and isinstance(node.right.value, int)
                    and node.right.value >= 0):
                raise SchemaError("poly", f"exponent must be a nonnegative integer in {expr!r}")
            return base.power(node.right.value)
        left = _poly_node(node.left, expr, dim)
        right = _poly_node(node.right, expr, dim)
        if isinstance(node.op, ast.Add):
            return left + right
        if isinstance(node.op, ast.Sub):
            return left - right
        if isinstance(node.op, ast.Mult):
            return left * right
        if isinstance(node.op, ast.Div):
            if not right.is_constant() or right.constant_value() == 0:
                raise SchemaError("poly", f"division only by nonzero constants in {expr!r}")
            return left.scale(1 / right.constant_value())
    raise SchemaError("poly", f"unsupported syntax in {expr!r}")


def poly_from_json(obj, dim: int, path="poly") -> Polynomial:
    if isinstance(obj, str):
        return parse_poly(obj, dim)
    if isinstance(obj, dict):
        coeffs = {}
        for key, c in obj.items():
            alpha = tuple(int(a) for a in key.split(","))
            if len(alpha) != dim:
                raise SchemaError(path, f"multi-index {key!r} has wrong length")
            coeffs[alpha] = num_from_json(c, path)
        return Polynomial(dim, coeffs)
    return Polynomial.constant(dim, num_from_json(obj, path))


def poly_to_json(poly: Polynomial):
    return {",".join(str(a) for a in alpha): num_to_json(c)
            for alpha, c in sorted(poly.coeffs.items())}


# -- polytopes -------------------------------------------------------------------


def polytope_from_json(obj, path="polytope") -> DelzantPolytope:
    if not isinstance(obj, dict) or "facets" not in obj:
        raise SchemaError(path, "expected an object with a 'facets' list")
    halfspaces = []
    for i, f in enumerate(obj["facets"]):
        fp = f"{path}.facets[{i}]"
        if not isinstance(f, dict) or "normal" not in f or "offset" not in f:
            raise SchemaError(fp, "facet needs 'normal' and 'offset'")
        halfspaces.append(HalfSpace([int(c) for c in f["normal"]],
                                    num_from_json(f["offset"], fp)))
    p = DelzantPolytope(halfspaces)
    if "dim" in obj and int(obj["dim"]) != p.dim:
        raise SchemaError(path, f"declared dim {obj['dim']} != facet dim {p.dim}")
    return p


def polytope_to_json(p: DelzantPolytope):
    return {
        "dim": p.dim,
        "facets": [
            {"normal": [int(c) for c in h.normal], "offset": num_to_json(h.offset)}
            for h in p.halfspaces
        ],
    }


def affine_from_json(obj, dim: int, path="affine") -> AffineFunction:
    if isinstance(obj, (int, float, str)):
        return AffineFunction.constant(dim, num_from_json(obj, path))
    if isinstance(obj, list):
        if len(obj) != dim:
            raise SchemaError(path, f"direction length {len(obj)} != dim {dim}")
        return AffineFunction([num_from_json(z, path) for z in obj], 0)
    if isinstance(obj, dict):
        zeta = [num_from_json(z, path) for z in obj.get("zeta", [0] * dim)]
        return AffineFunction(zeta, num_from_json(obj.get("a", 0), path))
    raise SchemaError(path, f"cannot read an affine function from {obj!r}")


def affine_to_json(aff: AffineFunction):
    return {"zeta": [num_to_json(z) for z in aff.zeta], "a": num_to_json(aff.const)}


# -- weights ---------------------------------------------------------------------


def weight_from_json(obj, dim: int, path="weight"):
    if isinstance(obj, (int, float)) or (isinstance(obj, str) and "/" in obj):
        return WeightFn.constant(dim, num_from_json(obj, path))
    if isinstance(obj, str):
        poly = parse_poly(obj, dim)
        if poly.degree() == 1:
            # keep affine weights in factored form so soliton synthesis applies
            zeta = [poly.coeffs.get(tuple(1 if j == i else 0 for j in range(dim)), 0)
                    for i in range(dim)]
            return WeightFn.affine_power(AffineFunction(zeta, poly.constant_value()), 1)
        return WeightFn.from_polynomial(poly)
    if isinstance(obj, list):
        return WeightSum([weight_from_json(t, dim, f"{path}[{i}]")
                          for i, t in enumerate(obj)])
    if not isinstance(obj, dict):
        raise SchemaError(path, f"cannot read a weight from {obj!r}")
    if "sum" in obj:
        return WeightSum([weight_from_json(t, dim, f"{path}.sum[{i}]")
                          for i, t in enumerate(obj["sum"])])
    coeff = num_from_json(obj.get("scalar", 1), path)
    powers = []
    for i, ap in enumerate(obj.get("affine_powers", [])):
        app = f"{path}.affine_powers[{i}]"
        aff = affine_from_json({"zeta": ap.get("zeta"), "a": ap.get("a", 0)}, dim, app)
        powers.append((aff, num_from_json(ap.get("pow", 1), app)))
    exp_part = None
    if obj.get("exp") is not None:
        exp_part = affine_from_json(obj["exp"], dim, f"{path}.exp")
    poly_part = None
    if obj.get("poly") is not None:
        poly_part = poly_from_json(obj["poly"], dim, f"{path}.poly")
    return WeightFn(dim, coeff=coeff, affine_powers=tuple(powers),
                    exp_part=exp_part, poly_part=poly_part)


def weight_to_json(w):
    if isinstance(w, WeightSum):
        return {"sum": [weight_to_json(t) for t in w.terms()]}
    out = {"scalar": num_to_json(w.coeff)}
    if w.affine_powers:
        out["affine_powers"] = [
            {"zeta": [num_to_json(z) for z in aff.zeta],
             "a": num_to_json(aff.const), "pow": num_to_json(p)}
            for aff, p in w.affine_powers
        ]
    if w.exp_part is not None:
        out["exp"] = affine_to_json(w.exp_part)
    if w.poly_part is not None:
        out["poly"] = poly_to_json(w.poly_part)
    return out


# -- fibrations -----------------------------------------------------------------


def fibration_from_json(obj, path="fibration") -> FibrationSpec:
    if not isinstance(obj, dict) or "fiber" not in obj:
        raise SchemaError(path, "expected an object with a 'fiber' polytope")
    fiber = polytope_from_json(obj["fiber"], f"{path}.fiber")
    factors = []
    for i, f in enumerate(obj.get("factors", [])):
        fp = f"{path}.factors[{i}]"
        if "n" not in f:
            raise SchemaError(fp, "factor needs a dimension 'n'")
        if ("k" in f) == ("s" in f):
            raise SchemaError(fp, "factor needs exactly one of 'k' or 's'")
        factor = (BaseFactor(int(f["n"]), k=int(f["k"])) if "k" in f
                  else BaseFactor(int(f["n"]), s=num_from_json(f["s"], fp)))
        p_a = [int(z) for z in f.get("p", [0] * fiber.dim)]
        c_a = num_from_json(f.get("c", f.get("k", 1)), fp)
        factors.append((factor, p_a, c_a))
    return FibrationSpec(fiber, factors)


def fibration_to_json(spec: FibrationSpec):
    factors = []
    for factor, p_a, c_a in spec.factors:
        entry = {"n": factor.n, "p": list(p_a), "c": num_to_json(c_a)}
        if factor.is_fano:
            entry["k"] = int(factor.k)
        else:
            entry["s"] = num_to_json(factor.s)
        factors.append(entry)
    return {"fiber": polytope_to_json(spec.fiber), "factors": factors}


# -- result reports ----------------------------------------------------------------


def futaki_report_to_json(r: FutakiReport):
    return {
        "direction": affine_to_json(r.direction),
        "value": r.value,
        "exact": num_to_json(r.exact) if r.exact is not None else None,
        "method": r.method,
        "normalization": r.normalization,
        "error_estimate": r.error_estimate,
    }


def extremal_to_json(e: ExtremalFunction):
    return {
        "ell_ext": affine_to_json(e.function),
        "gram_condition_number": e.gram_condition_number,
        "gram_min_eigenvalue": e.gram_min_eigenvalue,
        "residuals": list(e.residuals),
    }


def solver_result_to_json(r: SolverResult):
    return {
        "xi0": [float(z) for z in r.xi0],
        "objective": r.objective,
        "grad_norm": r.grad_norm,
        "hessian_min_eigenvalue": r.hessian_min_eigenvalue,
        "iterations": r.iterations,
        "converged": r.converged,
        "trace": [
            {"xi": [float(z) for z in xi], "objective": obj, "step": step}
            for xi, obj, step in r.trace
        ],
    }
