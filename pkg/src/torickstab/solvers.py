"""Newton solvers for the soliton vector field and the Reeb minimizer.

Both functionals are smooth and strictly convex on their feasible sets, with
gradients and Hessians given by moment integrals over the polytope, so damped
Newton iterations converge globally from xi = 0.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .errors import (
    InfeasibleStart,
    MaxIterations,
    NotPositiveDefinite,
    OriginNotInterior,
)
from .exactlinalg import frac
from .polynomial import Polynomial
from .polytope import AffineFunction, DelzantPolytope
from .quadrature import integrate_weighted
from .weights import WeightFn, as_weight, require_positive

DEFAULT_TOL = 1e-10
DEFAULT_MAX_ITER = 100
ARMIJO_C = 1e-4
BOUNDARY_FRACTION = 0.95  # Reeb steps keep >= 5% of the previous boundary margin


@dataclass
class SolverResult:
    xi0: tuple
    objective: float
    grad_norm: float
    hessian_min_eigenvalue: float
    iterations: int
    trace: list = field(default_factory=list)  # (xi, objective, step length)
    converged: bool = True


def _check_origin(polytope: DelzantPolytope):
    if not polytope.contains_interior([Fraction(0)] * polytope.dim):
        raise OriginNotInterior("the functional is proper only when 0 is interior")


def _moment_weights(dim: int):
    """Weight factors 1, x_1..x_r, and x_i x_j for moment integrals."""
    ones = [WeightFn.from_polynomial(Polynomial.constant(dim, 1))]
    lin = [
        WeightFn.from_polynomial(
            Polynomial.linear([1 if j == i else 0 for j in range(dim)])
        )
        for i in range(dim)
    ]
    quad = [
        [
            WeightFn.from_polynomial(
                Polynomial.linear([1 if k == i else 0 for k in range(dim)])
                * Polynomial.linear([1 if k == j else 0 for k in range(dim)])
            )
            for j in range(dim)
        ]
        for i in range(dim)
    ]
    return ones[0], lin, quad


def _newton_loop(polytope, objective_parts, feasible, limit_step, tol, max_iter):
    """Shared damped-Newton driver.

    objective_parts(xi) returns (F, grad, hess); feasible(xi) says whether xi
    is admissible; limit_step(xi, direction) caps the initial step length.
    """
    r = polytope.dim
    xi = np.zeros(r)
    trace = []
    f_val, grad, hess = objective_parts(xi)
    min_eig = float(np.linalg.eigvalsh(hess)[0])
    for it in range(1, max_iter + 1):
        gnorm = float(np.linalg.norm(grad))
        trace.append((tuple(xi), f_val, 0.0 if it == 1 else trace_step))
        if gnorm <= tol * max(abs(f_val), 1.0):
            return SolverResult(tuple(xi), f_val, gnorm, min_eig, it - 1, trace)
        if min_eig <= 0:
            raise NotPositiveDefinite(
                f"Hessian minimum eigenvalue {min_eig:.3e} at iterate {it}"
            )
        step = np.linalg.solve(hess, -grad)
        t = limit_step(xi, step)
        # Armijo backtracking on the exact objective
        slope = float(grad @ step)
        accepted = False
        for _ in range(60):
            cand = xi + t * step
            if feasible(cand):
                f_new, g_new, h_new = objective_parts(cand)
                if f_new <= f_val + ARMIJO_C * t * slope:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            raise MaxIterations(
                "line search failed to find a descent step",
                result=SolverResult(tuple(xi), f_val, gnorm, min_eig, it, trace,
                                    converged=False),
            )
        xi, f_val, grad, hess = cand, f_new, g_new, h_new
        min_eig = float(np.linalg.eigvalsh(hess)[0])
        trace_step = t
    gnorm = float(np.linalg.norm(grad))
    result = SolverResult(tuple(xi), f_val, gnorm, min_eig, max_iter, trace,
                          converged=False)
    raise MaxIterations(f"no convergence in {max_iter} iterations", result=result)


def tian_zhu_soliton(polytope: DelzantPolytope, p, tol=DEFAULT_TOL,
                     max_iter=DEFAULT_MAX_ITER) -> SolverResult:
    """Minimize F(xi) = int exp(<xi,x>) p(x) dx; the critical point is the
    soliton vector field, where the p-weighted exp-barycenter sits at 0."""
    _check_origin(polytope)
    require_positive(p, polytope, name="p")
    p = as_weight(p, polytope.dim)
    r = polytope.dim
    _, lin, quad = _moment_weights(r)
    qtol = tol * 1e-2  # moments two orders tighter than the solver

    def parts(xi):
        e = WeightFn.exp_affine([frac(float(z)) for z in xi], 0)
        base = p * e
        f = integrate_weighted(polytope, base, tol=qtol).value
        g = np.array([
            integrate_weighted(polytope, base * lin[i], tol=qtol).value
            for i in range(r)
        ])
        h = np.empty((r, r))
        for i in range(r):
            for j in range(i, r):
                h[i, j] = h[j, i] = integrate_weighted(
                    polytope, base * quad[i][j], tol=qtol
                ).value
        return f, g, h

    return _newton_loop(polytope, parts, lambda xi: True, lambda xi, d: 1.0,
                        tol, max_iter)


def msy_reeb(polytope: DelzantPolytope, p, s, tol=DEFAULT_TOL,
             max_iter=DEFAULT_MAX_ITER) -> SolverResult:
    """Minimize V(xi) = int (<xi,x>+1)^(-s) p(x) dx over the cone where
    <xi,x>+1 > 0 on the polytope; the optimum is the normalized Reeb field."""
    _check_origin(polytope)
    require_positive(p, polytope, name="p")
    p = as_weight(p, polytope.dim)
    r = polytope.dim
    s = float(s)
    _, lin, quad = _moment_weights(r)
    qtol = tol * 1e-2

    def min_vertex(xi):
        aff = AffineFunction([frac(float(z)) for z in xi], 1)
        return float(polytope.vertex_min(aff))

    if min_vertex(np.zeros(r)) <= 0:
        raise InfeasibleStart("xi = 0 is not feasible")  # unreachable: ell_0 = 1

    def feasible(xi):
        return min_vertex(xi) > 0

    def limit_step(xi, d):
        # fraction-to-boundary: keep the min-vertex value of ell above
        # (1 - BOUNDARY_FRACTION) of its current value
        cur = min_vertex(xi)
        t = 1.0
        for _ in range(200):
            if min_vertex(xi + t * d) >= (1.0 - BOUNDARY_FRACTION) * cur:
                return t
            t *= 0.5
        return t

    def parts(xi):
        aff = AffineFunction([frac(float(z)) for z in xi], 1)
        pw = lambda e: WeightFn.affine_power(aff, frac(e))
        base0 = p * pw(-s)
        base1 = p * pw(-s - 1)
        base2 = p * pw(-s - 2)
        f = integrate_weighted(polytope, base0, tol=qtol).value
        g = -s * np.array([
            integrate_weighted(polytope, base1 * lin[i], tol=qtol).value
            for i in range(r)
        ])
        h = np.empty((r, r))
        for i in range(r):
            for j in range(i, r):
                h[i, j] = h[j, i] = s * (s + 1) * integrate_weighted(
                    polytope, base2 * quad[i][j], tol=qtol
                ).value
        return f, g, h

    return _newton_loop(polytope, parts, feasible, limit_step, tol, max_iter)
