import math
from fractions import Fraction

import numpy as np
import pytest

from torickstab.errors import MaxIterations, OriginNotInterior
from torickstab.invariants import futaki_fano
from torickstab.polytope import AffineFunction
from torickstab.solvers import msy_reeb, tian_zhu_soliton
from torickstab.weights import WeightFn

from conftest import make_polytope


def _p_affine():
    return WeightFn.affine_power(AffineFunction([1], 2), 1)


def _soliton_gradient(xi):
    """g(xi) = int_{-1}^{1} x e^{xi x} (x + 2) dx via antiderivatives."""
    a = xi

    def F(x):
        # antiderivative of (x^2 + 2x) e^{ax}
        return math.exp(a * x) * (
            (a * a * x * x - 2 * a * x + 2) / a ** 3
            + 2 * (a * x - 1) / a ** 2)

    return F(1.0) - F(-1.0)


def _reeb_gradient_factor(xi):
    """h(xi) = int_{-1}^{1} x (xi x + 1)^{-4} (x + 2) dx via u = xi x + 1."""

    def F(u):
        return -1.0 / u - (xi - 1.0) / u ** 2 - (1.0 - 2.0 * xi) / (3.0 * u ** 3)

    return (F(1.0 + xi) - F(1.0 - xi)) / xi ** 3


def _bisect(f, lo, hi, increasing, steps=200):
    for _ in range(steps):
        mid = 0.5 * (lo + hi)
        val = f(mid)
        if (val < 0) == increasing:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def test_soliton_symmetric_cases(interval, square):
    for p in (interval, square):
        res = tian_zhu_soliton(p, WeightFn.constant(p.dim, 1))
        assert np.linalg.norm(res.xi0) <= 1e-12
        assert res.converged


def test_soliton_matches_independent_root(interval):
    res = tian_zhu_soliton(interval, _p_affine())
    xi = res.xi0[0]
    assert -1.0 < xi < 0.0
    oracle = _bisect(_soliton_gradient, -1.0, -1e-6, increasing=True)
    assert xi == pytest.approx(oracle, abs=1e-10)
    assert xi == pytest.approx(-0.5276195198969627, abs=1e-10)
    # first-order condition: gradient of the exact functional vanishes
    assert abs(_soliton_gradient(xi)) <= 1e-9


def test_soliton_futaki_vanishes_at_optimum(interval):
    res = tian_zhu_soliton(interval, _p_affine())
    v = _p_affine() * WeightFn.exp_affine([Fraction(res.xi0[0]).limit_denominator(
        10 ** 15)], 0)
    rep = futaki_fano(interval, v, [1])
    assert abs(rep.value) <= 1e-9


def test_soliton_descent_is_monotone(interval):
    res = tian_zhu_soliton(interval, _p_affine())
    objectives = [f for _, f, _ in res.trace]
    assert all(b <= a + 1e-15 for a, b in zip(objectives, objectives[1:]))
    assert res.hessian_min_eigenvalue > 0


def test_reeb_matches_independent_root(interval):
    res = msy_reeb(interval, _p_affine(), 3)
    xi = res.xi0[0]
    oracle = _bisect(_reeb_gradient_factor, 1e-9, 1.0 - 1e-9, increasing=False)
    assert xi == pytest.approx(oracle, abs=1e-10)
    assert xi == pytest.approx(0.13148290817953467, abs=1e-10)
    assert res.hessian_min_eigenvalue > 0


def test_reeb_symmetric_case(p2):
    res = msy_reeb(p2, WeightFn.constant(2, 1), 4)
    assert np.linalg.norm(res.xi0) <= 1e-12


def test_reeb_iterates_stay_feasible(interval):
    res = msy_reeb(interval, _p_affine(), 3)
    for xi, _, _ in res.trace:
        aff = AffineFunction([Fraction(z).limit_denominator(10 ** 15)
                              for z in xi], 1)
        assert interval.vertex_min(aff) > 0


def test_origin_must_be_interior():
    shifted = make_polytope(((1,), 0), ((-1,), 2))  # [0, 2]
    with pytest.raises(OriginNotInterior):
        tian_zhu_soliton(shifted, WeightFn.constant(1, 1))
    with pytest.raises(OriginNotInterior):
        msy_reeb(shifted, WeightFn.constant(1, 1), 3)


def test_max_iterations_carries_partial_result(interval):
    with pytest.raises(MaxIterations) as info:
        tian_zhu_soliton(interval, _p_affine(), max_iter=1)
    partial = info.value.result
    assert partial is not None and not partial.converged
    assert len(partial.trace) >= 1
