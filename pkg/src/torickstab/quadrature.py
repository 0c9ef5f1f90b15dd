"""Integration over Delzant polytopes and their boundaries.

Three integrand families are supported: exact rational polynomials, and
polynomial x exp(affine) / polynomial x (positive affine)^s via adaptive
Grundmann--Moeller simplex cubature with an embedded degree-7/degree-9 pair
and longest-edge bisection.
"""

from __future__ import annotations

import heapq
import itertools
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import factorial

import numpy as np

from .errors import DegenerateSimplex, MaxDepthExceeded, SingularOnDomain
from .exactlinalg import det, frac
from .polynomial import Polynomial, integrate_monomial_std_simplex
from .polytope import DelzantPolytope, Simplex
from .weights import WeightFn, WeightSum, as_weight

DEFAULT_TOL = 1e-12
ABS_FLOOR = 1e-14
MAX_DEPTH = 40

# Embedded Grundmann--Moeller pair: order s rule is exact to degree 2s+1.
GM_ORDER_LOW = 3   # degree 7
GM_ORDER_HIGH = 4  # degree 9


@dataclass
class QuadratureResult:
    value: float
    error_estimate: float
    subdivisions: int
    exact: Fraction = None  # set on the exact rational path
    converged: bool = True


# -- exact polynomial path ------------------------------------------------------


def integrate_monomial_simplex(simplex: Simplex, alpha) -> Fraction:
    """Exact integral of x^alpha over a simplex (Dirichlet factorial formula)."""
    return integrate_poly_simplex(simplex, Polynomial.monomial(simplex.dim, alpha))


def integrate_poly_simplex(simplex: Simplex, poly: Polynomial) -> Fraction:
    m = simplex.edge_matrix()
    d = det(m)
    if d == 0:
        raise DegenerateSimplex("simplex has zero volume")
    g = poly.compose_affine(m, simplex.vertices[0])
    total = Fraction(0)
    for beta, c in g.coeffs.items():
        total += c * integrate_monomial_std_simplex(beta)
    return total * abs(d)


def integrate_poly(polytope: DelzantPolytope, poly: Polynomial) -> Fraction:
    """Exact integral of a rational polynomial over the polytope."""
    return sum(
        (integrate_poly_simplex(s, poly) for s in polytope.triangulate()), Fraction(0)
    )


# -- Grundmann--Moeller rules ----------------------------------------------------


@lru_cache(maxsize=None)
def gm_rule(dim: int, order: int):
    """Grundmann--Moeller rule on the standard dim-simplex, exact to degree 2*order+1.

    Returns (barycentric points (P, dim+1) float array, weights (P,) float array);
    weights sum to the simplex volume 1/dim!.
    """
    s, n = order, dim
    d = 2 * s + 1
    points = []
    weights = []
    for i in range(s + 1):
        denom = d + n - 2 * i
        w = (
            Fraction((-1) ** i)
            * Fraction(denom) ** d
            / (Fraction(2) ** (2 * s) * factorial(i) * factorial(d + n - i))
        )
        for k in _compositions(s - i, n + 1):
            points.append([Fraction(2 * kj + 1, denom) for kj in k])
            weights.append(w)
    pts = np.array([[float(c) for c in p] for p in points])
    wts = np.array([float(w) for w in weights])
    # exactness sanity: weights must sum to vol(std simplex)
    assert abs(wts.sum() - 1.0 / factorial(n)) < 1e-12
    return pts, wts


def _compositions(total, parts):
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


# -- adaptive integration ---------------------------------------------------------


class _FloatSimplex:
    __slots__ = ("verts", "depth")

    def __init__(self, verts, depth=0):
        self.verts = verts  # (dim+1, dim) float array
        self.depth = depth

    def volume(self):
        d = self.verts.shape[1]
        return abs(np.linalg.det(self.verts[1:] - self.verts[0])) / factorial(d)

    def bisect(self):
        """Split along the longest edge (deterministic tie-break by index)."""
        n = self.verts.shape[0]
        best, bi, bj = -1.0, 0, 1
        for i in range(n):
            for j in range(i + 1, n):
                l2 = float(np.sum((self.verts[i] - self.verts[j]) ** 2))
                if l2 > best + 1e-15:
                    best, bi, bj = l2, i, j
        mid = 0.5 * (self.verts[bi] + self.verts[bj])
        a = self.verts.copy()
        a[bi] = mid
        b = self.verts.copy()
        b[bj] = mid
        return _FloatSimplex(a, self.depth + 1), _FloatSimplex(b, self.depth + 1)


def _rule_pair(simplex: _FloatSimplex, evaluate):
    dim = simplex.verts.shape[1]
    pts_hi, wts_hi = gm_rule(dim, GM_ORDER_HIGH)
    pts_lo, wts_lo = gm_rule(dim, GM_ORDER_LOW)
    scale = factorial(dim) * simplex.volume()
    x_hi = pts_hi @ simplex.verts
    x_lo = pts_lo @ simplex.verts
    i_hi = scale * float(wts_hi @ evaluate(x_hi))
    i_lo = scale * float(wts_lo @ evaluate(x_lo))
    return i_hi, abs(i_hi - i_lo)


def _check_singularities(polytope: DelzantPolytope, weight):
    for aff, p in weight.singular_factors():
        vmin = polytope.vertex_min(aff)
        if vmin <= 0:
            raise SingularOnDomain(
                f"affine factor {aff} with exponent {p} attains {vmin} on the polytope"
            )


def integrate_weighted(polytope: DelzantPolytope, integrand, tol=DEFAULT_TOL,
                       abs_floor=ABS_FLOOR, max_depth=MAX_DEPTH) -> QuadratureResult:
    """Integral of a grammar weight (or polynomial) over the polytope.

    Purely polynomial integrands take the exact rational path. Otherwise an
    adaptive embedded GM 7/9 scheme with longest-edge bisection runs until the
    summed rule discrepancy meets max(tol*|value|, abs_floor).
    """
    w = as_weight(integrand, polytope.dim)
    if w.is_polynomial:
        exact = integrate_poly(polytope, w.to_polynomial())
        return QuadratureResult(float(exact), 0.0, 0, exact=exact)
    _check_singularities(polytope, w)
    return _adaptive(polytope.triangulate(), w.eval, tol, abs_floor, max_depth)


def _adaptive(simplices, evaluate, tol, abs_floor, max_depth) -> QuadratureResult:
    heap = []
    counter = itertools.count()
    total_val = 0.0
    total_err = 0.0
    for s in simplices:
        fs = _FloatSimplex(s.float_vertices())
        val, err = _rule_pair(fs, evaluate)
        total_val += val
        total_err += err
        heapq.heappush(heap, (-err, next(counter), fs, val, err))
    subdivisions = 0
    while total_err > max(tol * abs(total_val), abs_floor):
        neg_err, _, fs, val, err = heapq.heappop(heap)
        if fs.depth >= max_depth:
            result = QuadratureResult(total_val, total_err, subdivisions, converged=False)
            raise MaxDepthExceeded(
                f"bisection depth {max_depth} reached (error estimate {total_err:.3e})",
                result=result,
            )
        total_val -= val
        total_err -= err
        for child in fs.bisect():
            cval, cerr = _rule_pair(child, evaluate)
            total_val += cval
            total_err += cerr
            heapq.heappush(heap, (-cerr, next(counter), child, cval, cerr))
        subdivisions += 1
    return QuadratureResult(total_val, total_err, subdivisions)


# -- boundary integration -----------------------------------------------------------


def integrate_boundary(polytope: DelzantPolytope, integrand, tol=DEFAULT_TOL,
                       abs_floor=ABS_FLOOR, max_depth=MAX_DEPTH) -> QuadratureResult:
    """Integral over the polytope boundary with the lattice measure d(sigma).

    Each facet is pulled back to its lattice chart, where d(sigma) is Lebesgue,
    and integrated as an (r-1)-dimensional polytope integral.
    """
    w = as_weight(integrand, polytope.dim)
    _check_singularities(polytope, w)
    value = 0.0
    err = 0.0
    subdivisions = 0
    exact = Fraction(0)
    all_exact = True
    for _, facet in polytope.facets():
        if facet.subpolytope is None:  # point facet (r = 1), d(sigma)-mass 1
            if w.is_polynomial:
                fv = w.eval_exact(facet.origin)
                exact += fv
                value += float(fv)
            else:
                all_exact = False
                value += float(w.eval(np.array([float(c) for c in facet.origin])))
            continue
        matrix = [[facet.basis[i][j] for j in range(polytope.dim - 1)]
                  for i in range(polytope.dim)]
        pulled = w.compose_affine(matrix, facet.origin)
        res = integrate_weighted(facet.subpolytope, pulled, tol, abs_floor, max_depth)
        value += res.value
        err += res.error_estimate
        subdivisions += res.subdivisions
        if res.exact is not None:
            exact += res.exact
        else:
            all_exact = False
    return QuadratureResult(value, err, subdivisions,
                            exact=exact if all_exact else None)


# -- closed-form exp integrals ---------------------------------------------------------


CONFLUENCE_GAP = 1e-4


def exp_divided_difference(values):
    """Divided difference of exp at the given nodes.

    Recursive Newton table for well-separated nodes; below the confluence gap
    the value is computed from the Taylor series about the mean, where the
    divided difference of t^k is the complete homogeneous symmetric polynomial
    h_{k-r} of the (centered) nodes.
    """
    z = sorted(float(v) for v in values)
    r = len(z) - 1
    if r == 0:
        return np.exp(z[0])
    if z[-1] - z[0] < CONFLUENCE_GAP:
        return _exp_dd_series(z)
    table = [np.exp(v) for v in z]
    for level in range(1, r + 1):
        nxt = []
        for i in range(r + 1 - level):
            dz = z[i + level] - z[i]
            if abs(dz) < CONFLUENCE_GAP:
                nxt.append(_exp_dd_series(z[i:i + level + 1]))
            else:
                nxt.append((table[i + 1] - table[i]) / dz)
        table = nxt
    return table[0]


def _exp_dd_series(z):
    r = len(z) - 1
    mean = sum(z) / len(z)
    c = [v - mean for v in z]
    # h_j = complete homogeneous symmetric polynomial of degree j in c
    h = [1.0]
    total = 0.0
    term = 1.0 / factorial(r)  # j = 0 contribution h_0 / r!
    j = 0
    while True:
        total += h[j] / factorial(r + j)
        if abs(h[j] / factorial(r + j)) < 1e-18 * max(1.0, abs(total)) and j > 0:
            break
        if j > 200:
            break
        # Newton-like recursion h_{j+1} = sum_i c_i^{...}: use power sums
        j += 1
        pk = [sum(ci ** k for ci in c) for k in range(1, j + 1)]
        hj = sum(pk[k - 1] * h[j - k] for k in range(1, j + 1)) / j
        h.append(hj)
    _ = term
    return np.exp(mean) * total


def exp_affine_simplex_exact(simplex: Simplex, xi) -> float:
    """Closed-form integral of exp(<xi, x>) over a simplex.

    Equals r! * vol(S) * (divided difference of exp at the vertex values).
    """
    vol = simplex.volume()
    if vol == 0:
        raise DegenerateSimplex("simplex has zero volume")
    xi = [frac(v) for v in xi]
    vals = [float(sum(z * c for z, c in zip(xi, v))) for v in simplex.vertices]
    r = simplex.dim
    return factorial(r) * float(vol) * exp_divided_difference(vals)
