"""Delzant moment polytopes with exact rational data.

Vertices, triangulations, facet sub-polytopes and the lattice boundary measure
are all computed in exact rational arithmetic. The boundary measure convention
is d(sigma) = Lebesgue measure in lattice coordinates of the facet hyperplane,
equivalently dL_j wedge d(sigma) = dVol for the primitive facet function L_j.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from fractions import Fraction
from math import gcd

import numpy as np

from . import exactlinalg as xla
from .errors import NotDelzant, NotFullDimensional, Unbounded
from .exactlinalg import frac
from .polynomial import Polynomial


@dataclass(frozen=True)
class AffineFunction:
    """ell(x) = <zeta, x> + const with rational data."""

    zeta: tuple
    const: Fraction

    def __init__(self, zeta, const=0):
        object.__setattr__(self, "zeta", tuple(frac(z) for z in zeta))
        object.__setattr__(self, "const", frac(const))

    @classmethod
    def constant(cls, dim, c=1):
        return cls((0,) * dim, c)

    @classmethod
    def coordinate(cls, dim, i):
        return cls(tuple(1 if j == i else 0 for j in range(dim)), 0)

    @property
    def dim(self):
        return len(self.zeta)

    def eval_exact(self, x) -> Fraction:
        return sum((z * frac(v) for z, v in zip(self.zeta, x)), self.const)

    def eval(self, pts):
        pts = np.asarray(pts, dtype=float)
        z = np.array([float(v) for v in self.zeta])
        return pts @ z + float(self.const)

    def compose_affine(self, matrix, offset) -> "AffineFunction":
        """Pullback under x = offset + matrix @ t."""
        new_dim = len(matrix[0]) if matrix else 0
        zeta = tuple(
            sum(self.zeta[i] * frac(matrix[i][j]) for i in range(self.dim))
            for j in range(new_dim)
        )
        const = self.const + sum(self.zeta[i] * frac(offset[i]) for i in range(self.dim))
        return AffineFunction(zeta, const)

    def as_polynomial(self) -> Polynomial:
        return Polynomial.linear(self.zeta, self.const)

    def is_constant(self) -> bool:
        return all(z == 0 for z in self.zeta)

    def __repr__(self):
        return f"AffineFunction(zeta={self.zeta}, const={self.const})"


@dataclass(frozen=True)
class HalfSpace:
    """{x : <normal, x> + offset >= 0} with primitive integer normal."""

    normal: tuple
    offset: Fraction

    def __init__(self, normal, offset):
        normal = tuple(int(n) for n in normal)
        if all(n == 0 for n in normal):
            raise ValueError("half-space normal must be nonzero")
        g = 0
        for n in normal:
            g = gcd(g, abs(n))
        if g != 1:
            raise ValueError(f"half-space normal {normal} is not primitive")
        object.__setattr__(self, "normal", normal)
        object.__setattr__(self, "offset", frac(offset))

    @property
    def dim(self):
        return len(self.normal)

    def affine(self) -> AffineFunction:
        """The facet function L(x) = <normal, x> + offset."""
        return AffineFunction(self.normal, self.offset)

    def value(self, x) -> Fraction:
        return sum((frac(n) * frac(v) for n, v in zip(self.normal, x)), self.offset)


@dataclass(frozen=True)
class Simplex:
    """r+1 rational points spanning a full-dimensional simplex."""

    vertices: tuple

    def __init__(self, vertices):
        object.__setattr__(
            self, "vertices", tuple(tuple(frac(c) for c in v) for v in vertices)
        )

    @property
    def dim(self):
        return len(self.vertices) - 1

    def edge_matrix(self):
        v0 = self.vertices[0]
        return [
            [self.vertices[k + 1][i] - v0[i] for k in range(self.dim)]
            for i in range(self.dim)
        ]

    def volume(self) -> Fraction:
        d = xla.det(self.edge_matrix())
        vol = abs(d)
        for k in range(2, self.dim + 1):
            vol /= k
        return vol

    def float_vertices(self):
        return np.array([[float(c) for c in v] for v in self.vertices])


def _raw_vertices(halfspaces, dim):
    """All feasible intersection points of dim-subsets of the facet hyperplanes."""
    verts = []
    seen = set()
    for subset in itertools.combinations(range(len(halfspaces)), dim):
        rows = [list(halfspaces[j].normal) for j in subset]
        rhs = [-halfspaces[j].offset for j in subset]
        x = xla.solve(rows, rhs)
        if x is None:
            continue
        key = tuple(x)
        if key in seen:
            continue
        if all(h.value(x) >= 0 for h in halfspaces):
            seen.add(key)
            verts.append(key)
    return sorted(verts)


def _has_recession_direction(halfspaces, dim):
    """Exact unboundedness test: does {d : <u_j, d> >= 0 for all j} contain d != 0?

    Intersect the recession cone with the unit box and enumerate vertices of the
    resulting polytope; any nonzero vertex certifies unboundedness.
    """
    system = [(tuple(h.normal), Fraction(0)) for h in halfspaces]
    for i in range(dim):
        e = [0] * dim
        e[i] = 1
        system.append((tuple(e), Fraction(1)))
        system.append((tuple(-x for x in e), Fraction(1)))
    for subset in itertools.combinations(range(len(system)), dim):
        rows = [list(system[j][0]) for j in subset]
        rhs = [-system[j][1] for j in subset]
        d = xla.solve(rows, rhs)
        if d is None:
            continue
        if all(x == 0 for x in d):
            continue
        feasible = all(
            sum(frac(n) * x for n, x in zip(normal, d)) + off >= 0
            for normal, off in system
        )
        if feasible:
            return True
    return False


class DelzantPolytope:
    """Bounded full-dimensional polytope satisfying the Delzant condition."""

    def __init__(self, halfspaces, _skip_checks=False):
        halfspaces = list(halfspaces)
        if not halfspaces:
            raise ValueError("need at least one half-space")
        self.dim = halfspaces[0].dim
        if any(h.dim != self.dim for h in halfspaces):
            raise ValueError("inconsistent half-space dimensions")
        self.halfspaces = tuple(halfspaces)
        self.vertices = tuple(_raw_vertices(self.halfspaces, self.dim))
        if not self.vertices:
            raise NotFullDimensional("no vertices: intersection empty or degenerate")
        if _has_recession_direction(self.halfspaces, self.dim):
            raise Unbounded("half-space intersection has a recession direction")
        edges = [
            [v[i] - self.vertices[0][i] for i in range(self.dim)]
            for v in self.vertices[1:]
        ]
        if xla.rank(edges) < self.dim:
            raise NotFullDimensional("vertices span a lower-dimensional set")
        # vertex <-> facet incidence
        self.facet_adjacency = tuple(
            tuple(j for j, h in enumerate(self.halfspaces) if h.value(v) == 0)
            for v in self.vertices
        )
        if not _skip_checks:
            self._check_delzant()
        self._triangulation = None
        self._facets = None

    def _check_delzant(self):
        for v, incident in zip(self.vertices, self.facet_adjacency):
            if len(incident) != self.dim:
                raise NotDelzant(
                    f"vertex {v} lies on {len(incident)} facets, expected {self.dim}",
                    vertex=v,
                )
            d = xla.det([list(self.halfspaces[j].normal) for j in incident])
            if abs(d) != 1:
                raise NotDelzant(
                    f"vertex {v}: incident normal determinant {d}, expected +-1",
                    vertex=v,
                    determinant=d,
                )

    # -- queries -------------------------------------------------------------

    def is_canonical_fano(self) -> bool:
        """True iff every facet offset equals 1 (so 0 is interior)."""
        return all(h.offset == 1 for h in self.halfspaces)

    def contains(self, x) -> bool:
        return all(h.value(x) >= 0 for h in self.halfspaces)

    def contains_interior(self, x) -> bool:
        return all(h.value(x) > 0 for h in self.halfspaces)

    def vertex_min(self, affine: AffineFunction) -> Fraction:
        """Exact minimum of an affine function over the polytope (attained at a vertex)."""
        return min(affine.eval_exact(v) for v in self.vertices)

    def bounding_box(self):
        lo = [min(v[i] for v in self.vertices) for i in range(self.dim)]
        hi = [max(v[i] for v in self.vertices) for i in range(self.dim)]
        return lo, hi

    def float_vertices(self):
        return np.array([[float(c) for c in v] for v in self.vertices])

    # -- triangulation -------------------------------------------------------

    def triangulate(self, root_index=0):
        """Deterministic fan triangulation from the lexicographically smallest vertex.

        root_index selects the fan root among the sorted vertices (used by the
        independent-triangulation volume test).
        """
        if root_index == 0 and self._triangulation is not None:
            return self._triangulation
        tri = tuple(_triangulate(self, root_index))
        if root_index == 0:
            self._triangulation = tri
        return tri

    def volume(self) -> Fraction:
        return sum((s.volume() for s in self.triangulate()), Fraction(0))

    # -- facets ---------------------------------------------------------------

    def facets(self):
        """Facets as (HalfSpace, Facet) pairs carrying the lattice embedding.

        The embedding x = origin + basis @ t identifies the facet with a
        polytope in t-space where Lebesgue measure is exactly d(sigma).
        """
        if self._facets is None:
            self._facets = tuple(
                (h, _build_facet(self, j)) for j, h in enumerate(self.halfspaces)
            )
        return self._facets

    def translated(self, t):
        """The polytope Delta + t (t rational vector)."""
        t = [frac(v) for v in t]
        return DelzantPolytope(
            [
                HalfSpace(h.normal, h.offset - sum(frac(n) * ti for n, ti in zip(h.normal, t)))
                for h in self.halfspaces
            ]
        )

    def __repr__(self):
        return f"DelzantPolytope(dim={self.dim}, facets={len(self.halfspaces)}, vertices={len(self.vertices)})"


@dataclass(frozen=True)
class Facet:
    """A facet with its lattice-coordinate chart.

    origin + basis @ t maps t-space (dim r-1) onto the facet hyperplane; in
    these coordinates the lattice boundary measure d(sigma) is Lebesgue.
    For dim-0 facets (r = 1) the facet is the single point `origin` with
    d(sigma)-mass 1 and subpolytope None.
    """

    origin: tuple
    basis: tuple  # r x (r-1) integer matrix, rows indexed by ambient coords
    subpolytope: object  # DelzantPolytope of dim r-1, or None when r == 1
    vertex_indices: tuple

    @property
    def ambient_dim(self):
        return len(self.origin)

    def embed(self, t):
        """Map facet coordinates t to ambient coordinates."""
        return tuple(
            self.origin[i] + sum(frac(self.basis[i][j]) * frac(t[j]) for j in range(len(t)))
            for i in range(self.ambient_dim)
        )

    def sigma_measure(self) -> Fraction:
        """Total d(sigma)-mass of the facet."""
        if self.subpolytope is None:
            return Fraction(1)
        return self.subpolytope.volume()


def from_halfspaces(halfspaces) -> DelzantPolytope:
    """Build and validate a Delzant polytope from half-space data."""
    return DelzantPolytope(halfspaces)


def is_canonical_fano(p: DelzantPolytope) -> bool:
    return p.is_canonical_fano()


def _triangulate(p: DelzantPolytope, root_index=0):
    if p.dim == 1:
        return [Simplex(p.vertices)]
    root = p.vertices[root_index]
    root_facets = set(p.facet_adjacency[root_index])
    simplices = []
    for j, (h, facet) in enumerate(p.facets()):
        if j in root_facets:
            continue
        for sub in facet.subpolytope.triangulate() if facet.subpolytope else [None]:
            if sub is None:  # dim-1 polytope facets are points; unreachable here
                continue
            verts = [root] + [facet.embed(t) for t in sub.vertices]
            s = Simplex(verts)
            if xla.det(s.edge_matrix()) < 0:
                verts[1], verts[2] = verts[2], verts[1]
                s = Simplex(verts)
            simplices.append(s)
    return simplices


def _build_facet(p: DelzantPolytope, j: int) -> Facet:
    h = p.halfspaces[j]
    incident = [i for i in range(len(p.vertices)) if j in p.facet_adjacency[i]]
    origin = p.vertices[incident[0]]  # vertices are sorted, so this is lex-min
    if p.dim == 1:
        return Facet(origin, (), None, tuple(incident))
    v_mat = xla.unimodular_completion(h.normal)
    basis = tuple(tuple(v_mat[i][k] for k in range(1, p.dim)) for i in range(p.dim))
    sub_halfspaces = []
    for k, other in enumerate(p.halfspaces):
        if k == j:
            continue
        aff = other.affine().compose_affine(basis, origin)
        if all(z == 0 for z in aff.zeta):
            continue
        # normalize to primitive integer normal
        denom = 1
        for z in aff.zeta:
            denom = denom * z.denominator // gcd(denom, z.denominator)
        ints = [int(z * denom) for z in aff.zeta]
        g = 0
        for n in ints:
            g = gcd(g, abs(n))
        sub_halfspaces.append(
            HalfSpace(tuple(n // g for n in ints), aff.const * denom / g)
        )
    # dedupe identical half-spaces (parallel facets collapsing in the chart)
    uniq = {}
    for hs in sub_halfspaces:
        key = (hs.normal,)
        if key not in uniq or hs.offset < uniq[key].offset:
            uniq[key] = hs
    sub = DelzantPolytope(list(uniq.values()))
    return Facet(origin, basis, sub, tuple(incident))
