from fractions import Fraction

import pytest

from torickstab.polytope import DelzantPolytope, HalfSpace


def make_polytope(*halfspaces):
    return DelzantPolytope([HalfSpace(n, o) for n, o in halfspaces])


@pytest.fixture
def interval():
    """Canonical Fano segment [-1, 1] (the P^1 polytope)."""
    return make_polytope(((1,), 1), ((-1,), 1))


@pytest.fixture
def p2():
    """Canonical Fano triangle of P^2."""
    return make_polytope(((1, 0), 1), ((0, 1), 1), ((-1, -1), 1))


@pytest.fixture
def square():
    """Canonical Fano square [-1, 1]^2 (the P^1 x P^1 polytope)."""
    return make_polytope(((1, 0), 1), ((-1, 0), 1), ((0, 1), 1), ((0, -1), 1))


@pytest.fixture
def f1():
    """Canonical Fano quadrilateral of the one-point blow-up of P^2 (asymmetric)."""
    return make_polytope(((1, 0), 1), ((0, 1), 1), ((-1, -1), 1), ((0, -1), 1))


@pytest.fixture
def half():
    return Fraction(1, 2)
