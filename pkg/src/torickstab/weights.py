"""Weight functions on the moment polytope.

The grammar is  c * prod_i (affine_i)^{p_i} * exp(affine) * poly  and finite
sums of such terms. It is closed under products, the soliton log-derivative
construction and affine pullbacks, which is everything the library needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from fractions import Fraction

import numpy as np

from .errors import NotPositive
from .exactlinalg import frac
from .polynomial import Polynomial
from .polytope import AffineFunction, DelzantPolytope


class Positivity(Enum):
    POSITIVE = "positive"
    NOT_POSITIVE = "not_positive"
    INDETERMINATE = "indeterminate"


def _is_integral(p: Fraction) -> bool:
    return p.denominator == 1


@dataclass(frozen=True)
class WeightFn:
    """Single grammar term c * prod (affine)^p * exp(affine) * poly."""

    coeff: Fraction
    affine_powers: tuple  # of (AffineFunction, Fraction exponent)
    exp_part: object  # AffineFunction or None
    poly_part: object  # Polynomial or None
    dim: int

    def __init__(self, dim, coeff=1, affine_powers=(), exp_part=None, poly_part=None):
        factors = []
        for aff, p in affine_powers:
            p = frac(p)
            if p != 0:
                factors.append((aff, p))
        if poly_part is not None and poly_part.is_constant():
            coeff = frac(coeff) * poly_part.constant_value()
            poly_part = None
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "coeff", frac(coeff))
        object.__setattr__(self, "affine_powers", tuple(factors))
        object.__setattr__(self, "exp_part", exp_part)
        object.__setattr__(self, "poly_part", poly_part)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def constant(cls, dim, c=1):
        return cls(dim, coeff=c)

    @classmethod
    def exp_affine(cls, zeta, const=0):
        aff = AffineFunction(zeta, const)
        return cls(aff.dim, exp_part=aff)

    @classmethod
    def affine_power(cls, affine: AffineFunction, exponent=1, coeff=1):
        return cls(affine.dim, coeff=coeff, affine_powers=((affine, frac(exponent)),))

    @classmethod
    def from_polynomial(cls, poly: Polynomial):
        return cls(poly.dim, poly_part=poly)

    # -- structure ------------------------------------------------------------

    @property
    def is_polynomial(self) -> bool:
        return self.exp_part is None and all(
            p > 0 and _is_integral(p) for _, p in self.affine_powers
        )

    def singular_factors(self):
        """Affine factors whose exponent is negative or fractional."""
        return [(aff, p) for aff, p in self.affine_powers if p < 0 or not _is_integral(p)]

    def to_polynomial(self) -> Polynomial:
        if not self.is_polynomial:
            raise ValueError("weight is not purely polynomial")
        out = Polynomial.constant(self.dim, self.coeff)
        for aff, p in self.affine_powers:
            out = out * aff.as_polynomial().power(int(p))
        if self.poly_part is not None:
            out = out * self.poly_part
        return out

    def terms(self):
        return (self,)

    # -- algebra ---------------------------------------------------------------

    def scale(self, c) -> "WeightFn":
        return WeightFn(self.dim, self.coeff * frac(c), self.affine_powers,
                        self.exp_part, self.poly_part)

    def __mul__(self, other):
        if isinstance(other, WeightSum):
            return WeightSum([self * t for t in other.terms()])
        merged = {}
        order = []
        for aff, p in self.affine_powers + other.affine_powers:
            key = (aff.zeta, aff.const)
            if key not in merged:
                merged[key] = (aff, Fraction(0))
                order.append(key)
            merged[key] = (aff, merged[key][1] + p)
        exp_part = self.exp_part
        if other.exp_part is not None:
            if exp_part is None:
                exp_part = other.exp_part
            else:
                exp_part = AffineFunction(
                    tuple(a + b for a, b in zip(exp_part.zeta, other.exp_part.zeta)),
                    exp_part.const + other.exp_part.const,
                )
        poly = self.poly_part
        if other.poly_part is not None:
            poly = other.poly_part if poly is None else poly * other.poly_part
        return WeightFn(self.dim, self.coeff * other.coeff,
                        tuple(merged[k] for k in order), exp_part, poly)

    def __add__(self, other):
        return WeightSum(self.terms() + tuple(as_weight(other, self.dim).terms()))

    def compose_affine(self, matrix, offset) -> "WeightFn":
        """Pullback under x = offset + matrix @ t."""
        factors = tuple((aff.compose_affine(matrix, offset), p)
                        for aff, p in self.affine_powers)
        exp_part = None if self.exp_part is None else self.exp_part.compose_affine(matrix, offset)
        mat_rows = [[frac(matrix[i][j]) for j in range(len(matrix[0]) if matrix else 0)]
                    for i in range(self.dim)]
        poly = None if self.poly_part is None else self.poly_part.compose_affine(mat_rows, offset)
        new_dim = len(matrix[0]) if matrix else 0
        return WeightFn(new_dim, self.coeff, factors, exp_part, poly)

    # -- evaluation -------------------------------------------------------------

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        out = np.full(pts.shape[0], float(self.coeff))
        for aff, p in self.affine_powers:
            vals = aff.eval(pts)
            if _is_integral(p):
                out = out * vals ** int(p)
            else:
                out = out * np.power(vals, float(p))
        if self.exp_part is not None:
            out = out * np.exp(self.exp_part.eval(pts))
        if self.poly_part is not None:
            out = out * self.poly_part.eval(pts)
        return out[0] if single else out

    def eval_exact(self, x) -> Fraction:
        if self.exp_part is not None or any(not _is_integral(p) or p < 0
                                            for _, p in self.affine_powers):
            raise ValueError("exact evaluation only for polynomial weights")
        return self.to_polynomial().eval_exact(x)

    def _log_grad(self, pts):
        """Gradient of log(c * prod affine^p * exp part), ignoring poly_part."""
        n = pts.shape[0]
        g = np.zeros((n, self.dim))
        for aff, p in self.affine_powers:
            z = np.array([float(v) for v in aff.zeta])
            g += float(p) * z[None, :] / aff.eval(pts)[:, None]
        if self.exp_part is not None:
            g += np.array([float(v) for v in self.exp_part.zeta])[None, :]
        return g

    def grad(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        base = WeightFn(self.dim, self.coeff, self.affine_powers, self.exp_part)
        a_val = base.eval(pts)
        g0 = base._log_grad(pts)
        if self.poly_part is None:
            out = a_val[:, None] * g0
        else:
            q = self.poly_part.eval(pts)
            dq = np.stack([d.eval(pts) for d in self.poly_part.gradient()], axis=1)
            out = a_val[:, None] * (g0 * q[:, None] + dq)
        return out[0] if single else out

    def hess(self, pts):
        pts = np.asarray(pts, dtype=float)
        single = pts.ndim == 1
        if single:
            pts = pts[None, :]
        n = pts.shape[0]
        base = WeightFn(self.dim, self.coeff, self.affine_powers, self.exp_part)
        a_val = base.eval(pts)
        g0 = base._log_grad(pts)
        dg0 = np.zeros((n, self.dim, self.dim))
        for aff, p in self.affine_powers:
            z = np.array([float(v) for v in aff.zeta])
            dg0 -= float(p) * np.einsum("i,j->ij", z, z)[None] / (aff.eval(pts) ** 2)[:, None, None]
        hess_a = a_val[:, None, None] * (np.einsum("ni,nj->nij", g0, g0) + dg0)
        if self.poly_part is None:
            out = hess_a
        else:
            q = self.poly_part.eval(pts)
            grads = self.poly_part.gradient()
            dq = np.stack([d.eval(pts) for d in grads], axis=1)
            hq = np.zeros((n, self.dim, self.dim))
            for i in range(self.dim):
                for j in range(self.dim):
                    hq[:, i, j] = grads[i].partial(j).eval(pts)
            da = a_val[:, None] * g0
            out = (hess_a * q[:, None, None]
                   + np.einsum("ni,nj->nij", da, dq)
                   + np.einsum("ni,nj->nij", dq, da)
                   + a_val[:, None, None] * hq)
        return out[0] if single else out

    # -- positivity ---------------------------------------------------------------

    def positivity_on(self, polytope: DelzantPolytope, grid=7) -> Positivity:
        if self.coeff == 0:
            return Positivity.NOT_POSITIVE
        sign = 1 if self.coeff > 0 else -1
        for aff, p in self.affine_powers:
            vmin = polytope.vertex_min(aff)
            if vmin > 0:
                continue
            if vmin <= 0 and (p < 0 or not _is_integral(p)):
                return Positivity.NOT_POSITIVE
            if self.is_polynomial:
                # a nonpositive exact value at a vertex is a certificate
                vals = [self.to_polynomial().eval_exact(v)
                        for v in polytope.vertices]
                if any(val <= 0 for val in vals):
                    return Positivity.NOT_POSITIVE
            return Positivity.INDETERMINATE
        if self.poly_part is not None:
            vals = [self.poly_part.eval_exact(v) for v in polytope.vertices]
            pts = _sample_grid(polytope, grid)
            if len(pts):
                fvals = self.poly_part.eval(pts)
                if np.any(fvals <= 0) or any(v <= 0 for v in vals):
                    if sign > 0:
                        return Positivity.NOT_POSITIVE
                elif sign < 0:
                    return Positivity.NOT_POSITIVE
            if self.poly_part.degree() > 1:
                return Positivity.INDETERMINATE
            # affine poly part: vertex check is exact
            if all(v > 0 for v in vals):
                return Positivity.POSITIVE if sign > 0 else Positivity.NOT_POSITIVE
            return Positivity.NOT_POSITIVE if sign > 0 else Positivity.INDETERMINATE
        return Positivity.POSITIVE if sign > 0 else Positivity.NOT_POSITIVE

    def __repr__(self):
        bits = [f"coeff={self.coeff}"]
        if self.affine_powers:
            bits.append(f"affine_powers={self.affine_powers}")
        if self.exp_part is not None:
            bits.append(f"exp={self.exp_part}")
        if self.poly_part is not None:
            bits.append(f"poly={self.poly_part}")
        return "WeightFn(" + ", ".join(bits) + ")"


class WeightSum:
    """Finite sum of grammar terms."""

    __slots__ = ("_terms", "dim")

    def __init__(self, terms):
        terms = tuple(terms)
        if not terms:
            raise ValueError("empty weight sum")
        self._terms = terms
        self.dim = terms[0].dim

    def terms(self):
        return self._terms

    @property
    def is_polynomial(self):
        return all(t.is_polynomial for t in self._terms)

    def singular_factors(self):
        out = []
        for t in self._terms:
            out.extend(t.singular_factors())
        return out

    def to_polynomial(self):
        out = Polynomial.constant(self.dim, 0)
        for t in self._terms:
            out = out + t.to_polynomial()
        return out

    def scale(self, c):
        return WeightSum([t.scale(c) for t in self._terms])

    def __mul__(self, other):
        out = []
        for t in self._terms:
            out.extend((t * s) for s in as_weight(other, self.dim).terms())
        return WeightSum(out)

    def __add__(self, other):
        return WeightSum(self._terms + tuple(as_weight(other, self.dim).terms()))

    def compose_affine(self, matrix, offset):
        return WeightSum([t.compose_affine(matrix, offset) for t in self._terms])

    def eval(self, pts):
        return sum(t.eval(pts) for t in self._terms)

    def eval_exact(self, x):
        return sum(t.eval_exact(x) for t in self._terms)

    def grad(self, pts):
        return sum(t.grad(pts) for t in self._terms)

    def hess(self, pts):
        return sum(t.hess(pts) for t in self._terms)

    def positivity_on(self, polytope, grid=7):
        verdicts = [t.positivity_on(polytope, grid) for t in self._terms]
        if all(v is Positivity.POSITIVE for v in verdicts):
            return Positivity.POSITIVE
        pts = _sample_grid(polytope, grid)
        vals = self.eval(pts) if len(pts) else np.array([1.0])
        vverts = self.eval(polytope.float_vertices())
        if np.any(vals <= 0) or np.any(vverts < -1e-15):
            return Positivity.NOT_POSITIVE
        return Positivity.INDETERMINATE

    def __repr__(self):
        return "WeightSum(" + " + ".join(repr(t) for t in self._terms) + ")"


def as_weight(w, dim=None):
    """Coerce numbers and polynomials to weight grammar objects."""
    if isinstance(w, (WeightFn, WeightSum)):
        return w
    if isinstance(w, Polynomial):
        return WeightFn.from_polynomial(w)
    if isinstance(w, AffineFunction):
        return WeightFn.affine_power(w, 1)
    if dim is None:
        raise ValueError("dim required to coerce a scalar to a weight")
    return WeightFn.constant(dim, w)


def _sample_grid(polytope: DelzantPolytope, n_per_axis: int):
    lo, hi = polytope.bounding_box()
    axes = [np.linspace(float(a), float(b), n_per_axis) for a, b in zip(lo, hi)]
    mesh = np.stack(np.meshgrid(*axes, indexing="ij"), axis=-1).reshape(-1, polytope.dim)
    normals = np.array([[float(n) for n in h.normal] for h in polytope.halfspaces])
    offsets = np.array([float(h.offset) for h in polytope.halfspaces])
    inside = np.all(mesh @ normals.T + offsets[None, :] >= 0, axis=1)
    return mesh[inside]


def require_positive(w, polytope, name="weight"):
    verdict = as_weight(w, polytope.dim).positivity_on(polytope)
    if verdict is not Positivity.POSITIVE:
        raise NotPositive(f"{name} not certified positive on the polytope ({verdict.value})")


# -- weight pair synthesis -------------------------------------------------------


def soliton_weight_pair(v, m: int, polytope: DelzantPolytope = None):
    """Weights making a v-soliton a weighted-cscK metric: w = 2(m + <dlog v, x>) v.

    The log-derivative pairing is expanded termwise inside the grammar, so the
    returned w is a WeightSum with closed-form gradient.
    """
    v = as_weight(v)
    if isinstance(v, WeightSum):
        raise ValueError("soliton weight synthesis needs a single grammar term")
    if v.poly_part is not None:
        # <grad poly / poly, x> leaves the grammar; the library's weights never need it
        raise ValueError("soliton weight synthesis requires v without a free polynomial part")
    if polytope is not None:
        require_positive(v, polytope, "v")
    terms = [v.scale(2 * m)]
    if v.exp_part is not None:
        lin = Polynomial.linear(v.exp_part.zeta)
        if not lin.is_zero():
            terms.append((v * WeightFn.from_polynomial(lin)).scale(2))
    for aff, p in v.affine_powers:
        lin = Polynomial.linear(aff.zeta)
        if lin.is_zero():
            continue
        shifted = WeightFn(v.dim, v.coeff,
                           tuple((a2, (p2 - 1) if a2 is aff else p2)
                                 for a2, p2 in v.affine_powers),
                           v.exp_part, None)
        terms.append((shifted * WeightFn.from_polynomial(lin)).scale(2 * p))
    return v, WeightSum(terms)


def sasaki_weight_pair(xi, a, m: int, polytope: DelzantPolytope):
    """Sasaki--Einstein realization: (ell^-(m+1), 2 m a ell^-(m+2)) for ell = <xi,x>+a."""
    ell = AffineFunction(xi, a)
    if polytope.vertex_min(ell) <= 0:
        raise NotPositive(f"affine function {ell} not positive on the polytope")
    v = WeightFn.affine_power(ell, -(m + 1))
    w = WeightFn.affine_power(ell, -(m + 2), coeff=2 * m * frac(a))
    return v, w


def equivalent_sasaki_pair(xi, a, m: int, polytope: DelzantPolytope):
    """Alternative realization of the same soliton: (ell^-(m+2), 2(-2 ell + (m+2) a) ell^-(m+3))."""
    ell = AffineFunction(xi, a)
    if polytope.vertex_min(ell) <= 0:
        raise NotPositive(f"affine function {ell} not positive on the polytope")
    v = WeightFn.affine_power(ell, -(m + 2))
    w = WeightFn.affine_power(ell, -(m + 2), coeff=-4) + \
        WeightFn.affine_power(ell, -(m + 3), coeff=2 * (m + 2) * frac(a))
    return v, w
