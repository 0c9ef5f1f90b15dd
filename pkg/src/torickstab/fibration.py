"""Semi-simple principal torus fibrations over cscK bases.

A fibration spec pairs a toric fiber polytope with base factors (B_a, n_a,
curvature) twisted by lattice vectors p_a and offsets c_a. The induced fiber
weights are the polynomial p(x) = prod(<p_a,x>+c_a)^{n_a} and the curvature
sum q(x) = sum s_a/(<p_a,x>+c_a).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import NotAdmissible, NotCanonicalFano
from .exactlinalg import frac
from .invariants import extremal_affine
from .polytope import AffineFunction, DelzantPolytope
from .quadrature import DEFAULT_TOL
from .solvers import SolverResult, msy_reeb, tian_zhu_soliton
from .weights import WeightFn, WeightSum, as_weight, soliton_weight_pair


@dataclass(frozen=True)
class BaseFactor:
    """One cscK base factor: complex dimension n and scalar curvature data.

    Fano factors carry the positive integer k with s = 2 n k; general cscK
    factors carry s directly.
    """

    n: int
    k: int = None
    s: Fraction = None

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("base factor dimension must be at least 1")
        if (self.k is None) == (self.s is None):
            raise ValueError("specify exactly one of k (Fano) or s (cscK)")
        if self.k is not None:
            if int(self.k) < 1:
                raise ValueError("Fano constant k must be a positive integer")
            object.__setattr__(self, "s", Fraction(2 * self.n * int(self.k)))
        else:
            object.__setattr__(self, "s", frac(self.s))

    @property
    def is_fano(self) -> bool:
        return self.k is not None


@dataclass(frozen=True)
class FibrationSpec:
    fiber: DelzantPolytope
    factors: tuple = ()  # of (BaseFactor, p_a lattice vector, c_a rational)

    def __post_init__(self):
        norm = []
        for factor, p_a, c_a in self.factors:
            norm.append((factor, tuple(int(z) for z in p_a), frac(c_a)))
        object.__setattr__(self, "factors", tuple(norm))

    def twist_affine(self, a: int) -> AffineFunction:
        _, p_a, c_a = self.factors[a]
        return AffineFunction(p_a, c_a)


@dataclass
class FibrationWeights:
    p: WeightFn
    q: object  # WeightFn or WeightSum
    w_tilde: object
    ell_ext: AffineFunction
    residuals: list = field(default_factory=list)


def validate(spec: FibrationSpec) -> None:
    """Admissibility: every twist affine <p_a,x>+c_a strictly positive on the fiber."""
    for a in range(len(spec.factors)):
        aff = spec.twist_affine(a)
        vmin = spec.fiber.vertex_min(aff)
        if vmin <= 0:
            worst = min(spec.fiber.vertices, key=aff.eval_exact)
            raise NotAdmissible(
                f"factor {a}: {aff} attains {vmin} at vertex {worst}",
                factor_index=a,
                vertex=worst,
            )


def fibration_weight(spec: FibrationSpec) -> WeightFn:
    """Fiber weight polynomial p(x) = prod(<p_a,x>+c_a)^{n_a}."""
    validate(spec)
    p = WeightFn.constant(spec.fiber.dim, 1)
    for a, (factor, _, _) in enumerate(spec.factors):
        p = p * WeightFn.affine_power(spec.twist_affine(a), factor.n)
    return p


def base_curvature_weight(spec: FibrationSpec):
    """Curvature weight q(x) = sum_a s_a/(<p_a,x>+c_a)."""
    validate(spec)
    terms = []
    for a, (factor, _, _) in enumerate(spec.factors):
        if factor.s == 0:
            continue
        terms.append(WeightFn.affine_power(spec.twist_affine(a), -1, coeff=factor.s))
    if not terms:
        return WeightFn.constant(spec.fiber.dim, 0)
    if len(terms) == 1:
        return terms[0]
    return WeightSum(terms)


def extremal_fibration_weights(spec: FibrationSpec, tol=DEFAULT_TOL) -> FibrationWeights:
    """Weights (p, q, w_tilde = p*(ell_ext - q)) with ell_ext killing the Futaki
    invariant of the pair on every affine direction."""
    p = fibration_weight(spec)
    q = base_curvature_weight(spec)
    ext = extremal_affine(spec.fiber, p, p, extra_source=q, tol=tol)
    ell = ext.function
    w_tilde = p * WeightFn.from_polynomial(ell.as_polynomial()) + (p * q).scale(-1)
    return FibrationWeights(p=p, q=q, w_tilde=w_tilde, ell_ext=ell,
                            residuals=ext.residuals)


def soliton_fibration_weights(spec: FibrationSpec, v, m: int = None):
    """Soliton weight pair of the total space: soliton pair of p*v in fiber dim m."""
    p = fibration_weight(spec)
    v = as_weight(v, spec.fiber.dim)
    if m is None:
        m = spec.fiber.dim
    return soliton_weight_pair(p * v, m, polytope=spec.fiber)


def fano_check(spec: FibrationSpec) -> bool:
    """Anticanonical class check: fiber canonical Fano, factors Fano with c_a = k_a,
    and every twist affine strictly positive on the fiber."""
    if not spec.fiber.is_canonical_fano():
        raise NotCanonicalFano("Fano check requires the canonical fiber presentation")
    for a, (factor, _, c_a) in enumerate(spec.factors):
        if not factor.is_fano:
            raise ValueError(f"factor {a} has no Fano constant k")
        if c_a != factor.k:
            return False
        if spec.fiber.vertex_min(spec.twist_affine(a)) <= 0:
            return False
    return True


def enumerate_fano(fiber: DelzantPolytope, factors):
    """All lattice twist tuples (p_1..p_k) with <p_a,x>+k_a > 0 on the fiber.

    The admissible region per factor is bounded because 0 is interior, so an
    exact bounding box from vertex support values suffices; each integer
    candidate is kept iff strictly positive at every vertex.
    """
    if not fiber.is_canonical_fano():
        raise NotCanonicalFano("enumeration requires the canonical fiber presentation")
    per_factor = []
    for factor in factors:
        k = Fraction(int(factor.k if isinstance(factor, BaseFactor) else factor))
        per_factor.append(_admissible_lattice(fiber, k))
    return list(itertools.product(*per_factor))


def _admissible_lattice(fiber: DelzantPolytope, k: Fraction):
    r = fiber.dim
    verts = fiber.vertices
    # box: for each coordinate, bound |y_i| via the feasible polytope
    # {y : <y, v> >= -k for all vertices v}; its vertices come from r-subsets
    box = _feasible_box(verts, k, r)
    out = []
    for cand in itertools.product(*[range(lo, hi + 1) for lo, hi in box]):
        if all(sum(frac(c) * frac(vi) for c, vi in zip(cand, v)) + k > 0
               for v in verts):
            out.append(cand)
    return out


def _feasible_box(verts, k, r):
    from .exactlinalg import solve

    if r == 1:
        # <y, v> + k >= 0 for both endpoint values of v
        bounds = []
        for v in verts:
            if v[0] != 0:
                bounds.append(-k / v[0])
        lo = min(b for b in bounds)
        hi = max(b for b in bounds)
        return [(_ceil(lo), _floor(hi))]
    corners = []
    n = len(verts)
    for subset in itertools.combinations(range(n), r):
        rows = [list(verts[i]) for i in subset]
        sol = solve(rows, [-k] * r)
        if sol is None:
            continue
        if all(sum(frac(vi) * s for vi, s in zip(v, sol)) + k >= 0 for v in verts):
            corners.append(sol)
    box = []
    for i in range(r):
        lo = min(c[i] for c in corners)
        hi = max(c[i] for c in corners)
        box.append((_ceil(lo), _floor(hi)))
    return box


def _ceil(x: Fraction) -> int:
    return -((-x.numerator) // x.denominator)


def _floor(x: Fraction) -> int:
    return x.numerator // x.denominator


def pv_soliton_pipeline(spec: FibrationSpec, v=1, tol=1e-10, max_iter=100,
                        reeb: bool = False, s=None) -> SolverResult:
    """Soliton (or Reeb) solve for a Fano fibration with weight p*v.

    With reeb=True runs the volume minimization with exponent s (defaulting to
    fiber dim + total base dim + 1), certifying the Sasaki--Einstein Reeb field.
    """
    if not fano_check(spec):
        raise NotAdmissible("spec fails the Fano condition (c_a = k_a, strict positivity)")
    p = fibration_weight(spec)
    v = as_weight(v, spec.fiber.dim)
    pv = p * v
    if reeb:
        if s is None:
            m = spec.fiber.dim
            n = sum(factor.n for factor, _, _ in spec.factors)
            s = m + n + 1
        return msy_reeb(spec.fiber, pv, s, tol=tol, max_iter=max_iter)
    return tian_zhu_soliton(spec.fiber, pv, tol=tol, max_iter=max_iter)
