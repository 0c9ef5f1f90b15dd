import math
from fractions import Fraction

import numpy as np
import pytest

from torickstab.errors import MaxDepthExceeded, SingularOnDomain
from torickstab.polynomial import Polynomial, integrate_monomial_std_simplex
from torickstab.polytope import AffineFunction, Simplex
from torickstab.quadrature import (
    _adaptive,
    exp_affine_simplex_exact,
    exp_divided_difference,
    gm_rule,
    integrate_boundary,
    integrate_monomial_simplex,
    integrate_poly,
    integrate_poly_simplex,
    integrate_weighted,
)
from torickstab.weights import WeightFn

from conftest import make_polytope

STD2 = Simplex(((Fraction(0), Fraction(0)), (Fraction(1), Fraction(0)),
                (Fraction(0), Fraction(1))))
UNIT1 = Simplex(((Fraction(0),), (Fraction(1),)))


def test_monomial_simplex_values():
    assert integrate_monomial_simplex(STD2, (0, 0)) == Fraction(1, 2)
    assert integrate_monomial_simplex(STD2, (1, 1)) == Fraction(1, 24)
    assert integrate_monomial_simplex(UNIT1, (1,)) == Fraction(1, 2)


def test_dirichlet_formula_matches_direct():
    # factorial formula vs an independent iterated-integral value:
    # int over the standard 2-simplex of x^2 y = 2!/(2+3)! * ... = 1/60
    assert integrate_monomial_std_simplex((2, 1)) == Fraction(
        math.factorial(2) * math.factorial(1), math.factorial(2 + 3))


def test_integrate_poly_examples(interval, p2):
    assert integrate_poly(interval, Polynomial.linear([1])) == 0
    assert integrate_poly(interval, Polynomial.linear([1], 2)) == 4
    assert integrate_poly(p2, Polynomial.constant(2, 1)) == Fraction(9, 2)


def test_gm_rule_exactness():
    # the embedded pair must integrate all monomials up to its stated degrees
    for dim in (1, 2):
        for order, degree in ((3, 7), (4, 9)):
            pts, wts = gm_rule(dim, order)
            simplex = STD2 if dim == 2 else UNIT1
            verts = np.array(simplex.float_vertices())
            x = pts @ verts
            for total in range(degree + 1):
                for a0 in range(total + 1):
                    alpha = (a0, total - a0)[:dim] if dim == 2 else (total,)
                    if sum(alpha) != total:
                        continue
                    approx = math.factorial(dim) * float(simplex.volume()) * float(
                        wts @ np.prod(x ** np.array(alpha), axis=1))
                    exact = float(integrate_monomial_std_simplex(alpha))
                    assert approx == pytest.approx(exact, abs=1e-14)


def test_integrate_weighted_exp(interval):
    res = integrate_weighted(interval, WeightFn.exp_affine([1], 0))
    assert res.value == pytest.approx(2 * math.sinh(1.0), abs=1e-12)
    assert res.error_estimate <= 1e-11


def test_integrate_weighted_negative_power(interval):
    res = integrate_weighted(
        interval, WeightFn.affine_power(AffineFunction([1], 2), -3))
    assert res.value == pytest.approx(4.0 / 9.0, abs=1e-12)


def test_singular_on_domain(interval):
    with pytest.raises(SingularOnDomain):
        integrate_weighted(
            interval, WeightFn.affine_power(AffineFunction([2], 2), -3))


def test_polynomial_fast_path_is_exact(p2):
    poly = Polynomial(2, {(3, 2): Fraction(5, 7), (0, 0): 1})
    res = integrate_weighted(p2, WeightFn.from_polynomial(poly))
    assert res.exact == integrate_poly(p2, poly)
    assert res.error_estimate == 0.0


def test_adaptive_matches_exact_on_random_polynomials(interval, p2, f1):
    # the cubature machinery itself (no polynomial shortcut) against the
    # exact rational integrals, 100 seeded cases
    rng = np.random.default_rng(20240501)
    domains = [interval, p2, f1]
    for case in range(100):
        p = domains[case % 3]
        deg = int(rng.integers(0, 7))
        coeffs = {}
        for _ in range(4):
            alpha = tuple(int(a) for a in rng.integers(0, deg + 1, p.dim))
            if sum(alpha) <= 6:
                coeffs[alpha] = Fraction(int(rng.integers(-9, 10)), 7)
        poly = Polynomial(p.dim, coeffs)
        exact = float(integrate_poly(p, poly))
        res = _adaptive(p.triangulate(), poly.eval, 1e-12, 1e-14, 40)
        assert res.value == pytest.approx(exact, rel=1e-12, abs=1e-12)


def test_boundary_masses(interval, square, p2):
    assert integrate_boundary(interval, WeightFn.constant(1, 1)).exact == 2
    assert integrate_boundary(square, WeightFn.constant(2, 1)).exact == 8
    assert integrate_boundary(p2, WeightFn.constant(2, 1)).exact == 9


def test_boundary_nonpolynomial(p2):
    # edges of the P^2 triangle against hand antiderivatives:
    # x1 = -1 edge contributes 3, the two others log(4) each
    w = WeightFn.affine_power(AffineFunction([1, 0], 2), -1)
    res = integrate_boundary(p2, w)
    assert res.value == pytest.approx(3 + 2 * math.log(4.0), abs=1e-12)


def test_boundary_point_masses_nonpolynomial(interval):
    res = integrate_boundary(interval, WeightFn.exp_affine([1], 0))
    assert res.value == pytest.approx(math.e + math.exp(-1), abs=1e-14)


def test_exp_affine_simplex_exact():
    assert exp_affine_simplex_exact(STD2, (0, 0)) == pytest.approx(0.5, abs=1e-15)
    interval_simplex = Simplex(((Fraction(-1),), (Fraction(1),)))
    assert exp_affine_simplex_exact(interval_simplex, (1,)) == pytest.approx(
        2 * math.sinh(1.0), abs=1e-13)
    assert exp_affine_simplex_exact(STD2, (1, 0)) == pytest.approx(
        math.e - 2, abs=1e-13)


def test_exp_divided_difference_confluent():
    # the series branch must agree with the analytic limit exp(z)/r! as the
    # nodes coalesce, and with quadrature near confluence
    val = exp_divided_difference([0.5, 0.5 + 1e-9, 0.5 + 2e-9])
    assert val == pytest.approx(math.exp(0.5 + 1e-9) / 2.0, rel=1e-12)


def test_exp_affine_matches_quadrature_near_confluence():
    tri = make_polytope(((1, 0), 0), ((0, 1), 0), ((-1, -1), 1))
    xi = (1e-5, 5e-6)
    closed = exp_affine_simplex_exact(tri.triangulate()[0], xi)
    adaptive = integrate_weighted(tri, WeightFn.exp_affine(list(xi), 0)).value
    assert closed == pytest.approx(adaptive, rel=1e-11)


def test_additivity_over_refinement(interval):
    w = WeightFn.exp_affine([Fraction(1, 2)], 0)
    whole = integrate_weighted(interval, w).value
    left = make_polytope(((1,), 1), ((-1,), 0))
    right = make_polytope(((1,), 0), ((-1,), 1))
    parts = integrate_weighted(left, w).value + integrate_weighted(right, w).value
    assert whole == pytest.approx(parts, rel=1e-12)


def test_translation_covariance(p2):
    poly = Polynomial(2, {(2, 1): Fraction(3), (1, 0): -2})
    t = (Fraction(5), Fraction(-1, 3))
    moved = p2.translated(t)
    shifted = poly.compose_affine(
        [[1, 0], [0, 1]], t)  # f(x + t) on the original polytope
    assert integrate_poly(moved, poly) == integrate_poly(p2, shifted)


def test_monte_carlo_consistency(p2):
    rng = np.random.default_rng(99)
    w = WeightFn.exp_affine([Fraction(1, 2), Fraction(1, 5)], 0)
    n = 400000
    pts = rng.random((n, 2)) * 3.0 - 1.0
    inside = pts.sum(axis=1) <= 1.0
    vals = np.zeros(n)
    vals[inside] = w.eval(pts[inside])
    mc = vals.mean() * 9.0
    se = vals.std(ddof=1) / math.sqrt(n) * 9.0
    res = integrate_weighted(p2, w)
    assert abs(res.value - mc) <= 4 * se


def test_max_depth_exceeded_carries_result(interval):
    with pytest.raises(MaxDepthExceeded) as info:
        integrate_weighted(interval, WeightFn.exp_affine([1], 0),
                           tol=1e-16, abs_floor=1e-30, max_depth=2)
    res = info.value.result
    assert res is not None and not res.converged
    assert res.value == pytest.approx(2 * math.sinh(1.0), rel=1e-6)


def test_simplex_integral_vs_poly_path():
    poly = Polynomial(2, {(2, 2): Fraction(1), (1, 0): Fraction(-3, 4)})
    direct = integrate_poly_simplex(STD2, poly)
    total = Fraction(0)
    for alpha, c in poly.coeffs.items():
        total += c * integrate_monomial_simplex(STD2, alpha)
    assert direct == total
