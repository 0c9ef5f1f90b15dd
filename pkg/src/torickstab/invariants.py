"""Weighted Futaki invariants and the extremal affine function on toric data."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import pi

import numpy as np

from .errors import IllConditioned, NotCanonicalFano
from .exactlinalg import solve
from .polynomial import Polynomial
from .polytope import AffineFunction, DelzantPolytope
from .quadrature import DEFAULT_TOL, integrate_boundary, integrate_weighted
from .weights import WeightFn, as_weight, require_positive

CONDITION_LIMIT = 1e12


@dataclass
class FutakiReport:
    direction: AffineFunction
    value: float
    method: str  # fano_closed_form | boundary_formula | metric_numeric
    normalization: str  # polytope | symplectic
    exact: Fraction = None
    error_estimate: float = 0.0


@dataclass
class ExtremalFunction:
    function: AffineFunction
    gram_condition_number: float
    residuals: list = field(default_factory=list)
    gram_min_eigenvalue: float = 0.0


def _norm_factor(normalization: str, dim: int) -> float:
    if normalization == "polytope":
        return 1.0
    if normalization == "symplectic":
        return (2.0 * pi) ** dim
    raise ValueError(f"unknown normalization {normalization!r}")


def _linear(zeta, const=0) -> WeightFn:
    return WeightFn.from_polynomial(Polynomial.linear(zeta, const))


def futaki_fano(polytope: DelzantPolytope, v, zeta,
                normalization: str = "polytope", tol=DEFAULT_TOL) -> FutakiReport:
    """Closed-form Futaki value on a canonical Fano polytope.

    Valid for the weight pair (v, 2(m + <d log v, x>) v): the invariant in the
    affine direction <zeta, x> reduces to 2 * integral of <zeta, x> v(x) dx.
    """
    if not polytope.is_canonical_fano():
        raise NotCanonicalFano("closed form requires the canonical Fano presentation")
    require_positive(v, polytope, name="v")
    v = as_weight(v, polytope.dim)
    res = integrate_weighted(polytope, v * _linear(zeta), tol=tol)
    kappa = _norm_factor(normalization, polytope.dim)
    exact = None
    if res.exact is not None and normalization == "polytope":
        exact = 2 * res.exact
    return FutakiReport(
        direction=AffineFunction(zeta, 0),
        value=2.0 * kappa * res.value,
        method="fano_closed_form",
        normalization=normalization,
        exact=exact,
        error_estimate=2.0 * kappa * res.error_estimate,
    )


def futaki_boundary(polytope: DelzantPolytope, v, w, ell: AffineFunction,
                    tol=DEFAULT_TOL, normalization: str = "polytope") -> FutakiReport:
    """Boundary-formula Futaki value: 2*int_{bd} v ell dsigma - int w ell dx."""
    require_positive(v, polytope, name="v")
    v = as_weight(v, polytope.dim)
    w = as_weight(w, polytope.dim)
    ell_w = WeightFn.from_polynomial(ell.as_polynomial())
    bnd = integrate_boundary(polytope, v * ell_w, tol=tol)
    bulk = integrate_weighted(polytope, w * ell_w, tol=tol)
    kappa = _norm_factor(normalization, polytope.dim)
    exact = None
    if bnd.exact is not None and bulk.exact is not None and normalization == "polytope":
        exact = 2 * bnd.exact - bulk.exact
    return FutakiReport(
        direction=ell,
        value=kappa * (2.0 * bnd.value - bulk.value),
        method="boundary_formula",
        normalization=normalization,
        exact=exact,
        error_estimate=kappa * (2.0 * bnd.error_estimate + bulk.error_estimate),
    )


def _affine_basis(dim: int):
    basis = [AffineFunction.constant(dim, 1)]
    basis += [AffineFunction.coordinate(dim, i) for i in range(dim)]
    return basis


def extremal_affine(polytope: DelzantPolytope, v, w0, extra_source=None,
                    tol=DEFAULT_TOL) -> ExtremalFunction:
    """Affine function ell making Fut of (v, w0*ell - v*extra_source) vanish.

    Solves the Gram system over the basis {1, x_1, ..., x_r}; the Gram matrix
    is positive definite whenever w0 > 0. When all integrals land on the exact
    rational path the system is solved exactly.
    """
    r = polytope.dim
    require_positive(v, polytope, name="v")
    require_positive(w0, polytope, name="w0")
    v = as_weight(v, r)
    w0 = as_weight(w0, r)
    basis = _affine_basis(r)
    basis_w = [WeightFn.from_polynomial(b.as_polynomial()) for b in basis]

    gram_res = [[integrate_weighted(polytope, w0 * bi * bj, tol=tol)
                 for bj in basis_w] for bi in basis_w]
    rhs_res = []
    for bi in basis_w:
        bnd = integrate_boundary(polytope, v * bi, tol=tol)
        rhs_res.append([bnd])
        if extra_source is not None:
            src = as_weight(extra_source, r)
            rhs_res[-1].append(integrate_weighted(polytope, v * src * bi, tol=tol))

    gram = np.array([[res.value for res in row] for row in gram_res])
    rhs = np.array([2.0 * parts[0].value + sum(p.value for p in parts[1:])
                    for parts in rhs_res])
    eigs = np.linalg.eigvalsh(gram)
    cond = float(eigs[-1] / eigs[0]) if eigs[0] > 0 else float("inf")
    if eigs[0] <= 0 or cond > CONDITION_LIMIT:
        raise IllConditioned(
            f"Gram matrix condition number {cond:.3e}, min eigenvalue {eigs[0]:.3e}"
        )

    all_exact = all(res.exact is not None for row in gram_res for res in row) and all(
        p.exact is not None for parts in rhs_res for p in parts
    )
    if all_exact:
        gram_q = [[res.exact for res in row] for row in gram_res]
        rhs_q = [2 * parts[0].exact + sum(p.exact for p in parts[1:])
                 for parts in rhs_res]
        coeffs = solve(gram_q, rhs_q)
        ell = AffineFunction(coeffs[1:], coeffs[0])
    else:
        coeffs = np.linalg.solve(gram, rhs)
        ell = AffineFunction([float(c) for c in coeffs[1:]], float(coeffs[0]))

    w_eff = w0 * WeightFn.from_polynomial(ell.as_polynomial())
    if extra_source is not None:
        w_eff = w_eff + (v * as_weight(extra_source, r)).scale(-1)
    residuals = [futaki_boundary(polytope, v, w_eff, b, tol=tol).value for b in basis]
    return ExtremalFunction(
        function=ell,
        gram_condition_number=cond,
        residuals=residuals,
        gram_min_eigenvalue=float(eigs[0]),
    )


def barycenter(polytope: DelzantPolytope, v, tol=DEFAULT_TOL):
    """v-weighted barycenter of the polytope. Exact when v is polynomial."""
    require_positive(v, polytope, name="v")
    v = as_weight(v, polytope.dim)
    mass = integrate_weighted(polytope, v, tol=tol)
    out = []
    exact = mass.exact is not None
    for i in range(polytope.dim):
        zeta = [1 if j == i else 0 for j in range(polytope.dim)]
        mom = integrate_weighted(polytope, v * _linear(zeta), tol=tol)
        if exact and mom.exact is not None:
            out.append(mom.exact / mass.exact)
        else:
            exact = False
            out.append(mom.value / mass.value)
    return tuple(out)
