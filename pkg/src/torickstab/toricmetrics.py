"""Explicit toric metrics as numerical oracles for the curvature integrals.

A symplectic potential (Guillemin, optionally plus a polynomial bump) defines
a toric Kahler metric through the inverse Hessian H. Scalar curvature and its
weighted variants are evaluated by central finite differences on the analytic
H, and the Futaki integrand is integrated over a refined triangulation.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from math import ceil, factorial, log2

import numpy as np

from .errors import NotPositiveDefinite, TooCloseToBoundary
from .invariants import FutakiReport
from .polynomial import Polynomial
from .polytope import AffineFunction, DelzantPolytope
from .quadrature import GM_ORDER_HIGH, GM_ORDER_LOW, gm_rule
from .weights import as_weight

DEFAULT_FD_STEP = 1e-4
FD_BOUNDARY_FRACTION = 0.1  # per-point step capped at this fraction of the margin


@dataclass
class GridSpec:
    """Evaluation grid: per-axis resolution, interior margin, FD step."""

    resolution: int = 400
    margin: float = 1e-3
    h: float = DEFAULT_FD_STEP

    def __post_init__(self):
        if not self.margin > 2 * self.h:
            raise ValueError("interior margin must exceed twice the FD step")


class SymplecticPotential:
    """Guillemin potential of a Delzant polytope, plus an optional bump.

    u(x) = 1/2 sum_j L_j log L_j + bump(x); the Hessian is analytic:
    Hess u = 1/2 sum_j u_j u_j^T / L_j + Hess(bump).
    """

    def __init__(self, polytope: DelzantPolytope, bump: Polynomial = None,
                 check_grid: int = 9):
        self.polytope = polytope
        self.bump = bump
        hs = [h for h, _ in polytope.facets()]
        self.normals = np.array([[float(c) for c in h.normal] for h in hs])
        self.offsets = np.array([float(h.offset) for h in hs])
        r = polytope.dim
        if bump is not None:
            if bump.dim != r:
                raise ValueError("bump dimension does not match the polytope")
            self._bump_hess = [[bump.partial(i).partial(j) for j in range(r)]
                               for i in range(r)]
            self._validate(check_grid)
        else:
            self._bump_hess = None

    @property
    def kind(self) -> str:
        return "Guillemin" if self.bump is None else "GuilleminPlusBump"

    def _validate(self, n: int):
        from .weights import _sample_grid

        pts = np.asarray(_sample_grid(self.polytope, n), dtype=float)
        if pts.size:
            pts = pts[self.facet_values(pts).min(axis=1) > 1e-9]
        if pts.size:
            hess = self.hess(pts)
            if np.linalg.eigvalsh(hess).min() <= 0:
                raise NotPositiveDefinite(
                    "bump breaks convexity of the symplectic potential"
                )

    def facet_values(self, x):
        """L_j(x) for every facet; x is (N, r) or (r,)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        return x @ self.normals.T + self.offsets

    def hess(self, x):
        """Analytic Hessian of the potential at interior points; (N, r, r)."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        L = self.facet_values(x)
        if L.min() <= 0:
            raise TooCloseToBoundary("potential Hessian needs interior points")
        out = 0.5 * np.einsum("nf,fi,fj->nij", 1.0 / L, self.normals, self.normals)
        if self._bump_hess is not None:
            r = x.shape[1]
            for i in range(r):
                for j in range(r):
                    out[:, i, j] += self._bump_hess[i][j].eval(x)
        return out

    def normal_scale(self) -> float:
        return float(np.max(np.linalg.norm(self.normals, axis=1)))


def scaled_bump(polytope: DelzantPolytope, poly: Polynomial,
                check_grid: int = 9, max_halvings: int = 60) -> SymplecticPotential:
    """Halve the bump until the potential Hessian is positive definite."""
    scale = Fraction(1)
    for _ in range(max_halvings):
        try:
            return SymplecticPotential(polytope, poly.scale(scale), check_grid)
        except NotPositiveDefinite:
            scale /= 2
    raise NotPositiveDefinite("bump could not be scaled into convexity")


def _prepare(u: SymplecticPotential, x, h, margin):
    x = np.atleast_2d(np.asarray(x, dtype=float))
    L = u.facet_values(x)
    lmin = L.min(axis=1)
    if lmin.min() <= margin:
        raise TooCloseToBoundary(
            f"minimum facet value {lmin.min():.3e} within margin {margin:.3e}"
        )
    # shrink the step near the boundary so stencils stay strictly interior
    h_pt = np.minimum(h, FD_BOUNDARY_FRACTION * lmin / u.normal_scale())
    return x, h_pt


def hess_inv(u: SymplecticPotential, x, margin: float = 0.0):
    """Inverse Hessian H (the torus-direction metric); (r, r) or (N, r, r)."""
    single = np.asarray(x, dtype=float).ndim == 1
    xb = np.atleast_2d(np.asarray(x, dtype=float))
    L = u.facet_values(xb)
    if L.min() <= max(margin, 0.0):
        raise TooCloseToBoundary("point not interior with the requested margin")
    hess = u.hess(xb)
    if np.linalg.eigvalsh(hess).min() <= 0:
        raise NotPositiveDefinite("potential Hessian not positive definite")
    H = np.linalg.inv(hess)
    return H[0] if single else H


def _matrix_double_divergence(mfun, x, h_pt):
    """sum_ij d_i d_j M_ij by central differences; mfun(x) -> (N, r, r)."""
    n, r = x.shape
    total = np.zeros(n)
    m0 = mfun(x)
    for i in range(r):
        xp = x.copy()
        xp[:, i] += h_pt
        xm = x.copy()
        xm[:, i] -= h_pt
        mp, mm = mfun(xp), mfun(xm)
        total += (mp[:, i, i] - 2.0 * m0[:, i, i] + mm[:, i, i]) / h_pt ** 2
        for j in range(i + 1, r):
            xpp = xp.copy()
            xpp[:, j] += h_pt
            xpm = xp.copy()
            xpm[:, j] -= h_pt
            xmp = xm.copy()
            xmp[:, j] += h_pt
            xmm = xm.copy()
            xmm[:, j] -= h_pt
            mixed = (mfun(xpp)[:, i, j] - mfun(xpm)[:, i, j]
                     - mfun(xmp)[:, i, j] + mfun(xmm)[:, i, j]) / (4.0 * h_pt ** 2)
            total += 2.0 * mixed
    return total


def _vector_divergence(gfun, x, h_pt):
    """sum_i d_i G_i by central differences; gfun(x) -> (N, r)."""
    n, r = x.shape
    total = np.zeros(n)
    for i in range(r):
        xp = x.copy()
        xp[:, i] += h_pt
        xm = x.copy()
        xm[:, i] -= h_pt
        total += (gfun(xp)[:, i] - gfun(xm)[:, i]) / (2.0 * h_pt)
    return total


def _hinv(u):
    return lambda pts: np.linalg.inv(u.hess(pts))


def scal(u: SymplecticPotential, x, h: float = DEFAULT_FD_STEP, margin: float = 0.0):
    """Scalar curvature Scal = -sum_ij d_i d_j H_ij; scalar or (N,) array."""
    single = np.asarray(x, dtype=float).ndim == 1
    xb, h_pt = _prepare(u, x, h, margin)
    out = -_matrix_double_divergence(_hinv(u), xb, h_pt)
    return float(out[0]) if single else out


def scal_v_direct(u: SymplecticPotential, v, x, h: float = DEFAULT_FD_STEP,
                  margin: float = 0.0):
    """Weighted scalar curvature v*Scal + 2*Lap(v) + <H, Hess v>, with the
    positive Laplacian Lap(v) = -sum_i d_i(H_ij v_j)."""
    single = np.asarray(x, dtype=float).ndim == 1
    xb, h_pt = _prepare(u, x, h, margin)
    v = as_weight(v, u.polytope.dim)
    hinv = _hinv(u)
    s = -_matrix_double_divergence(hinv, xb, h_pt)

    def flux(pts):
        return np.einsum("nij,nj->ni", hinv(pts), v.grad(pts))

    lap = -_vector_divergence(flux, xb, h_pt)
    trace = np.einsum("nij,nij->n", hinv(xb), v.hess(xb))
    out = v.eval(xb) * s + 2.0 * lap + trace
    return float(out[0]) if single else out


def scal_v_divergence(u: SymplecticPotential, v, x, h: float = DEFAULT_FD_STEP,
                      margin: float = 0.0):
    """Weighted scalar curvature in divergence form: -sum_ij d_i d_j (v H_ij)."""
    single = np.asarray(x, dtype=float).ndim == 1
    xb, h_pt = _prepare(u, x, h, margin)
    v = as_weight(v, u.polytope.dim)
    hinv = _hinv(u)

    def vh(pts):
        return v.eval(pts)[:, None, None] * hinv(pts)

    out = -_matrix_double_divergence(vh, xb, h_pt)
    return float(out[0]) if single else out


def _refined_nodes(polytope: DelzantPolytope, resolution: int, order: int):
    """Cubature nodes and weights on a uniformly bisected triangulation sized
    so the total node count is at least resolution^dim."""
    r = polytope.dim
    base = polytope.triangulate()
    verts = np.array([s.float_vertices() for s in base])  # (S, r+1, r)
    pts, wts = gm_rule(r, order)
    target = resolution ** r
    levels = max(0, ceil(log2(max(1.0, target / (len(base) * len(wts))))))
    for _ in range(levels):
        verts = _bisect_all(verts)
    scale = factorial(r) * np.abs(np.linalg.det(verts[:, 1:] - verts[:, :1]) / factorial(r))
    nodes = np.einsum("pk,skr->spr", pts, verts).reshape(-1, r)
    weights = (scale[:, None] * wts[None, :]).reshape(-1)
    return nodes, weights


def _bisect_all(verts):
    """Longest-edge bisection of every simplex in the batch."""
    s, k, r = verts.shape
    pairs = [(i, j) for i in range(k) for j in range(i + 1, k)]
    d2 = np.stack([np.sum((verts[:, i] - verts[:, j]) ** 2, axis=1)
                   for i, j in pairs], axis=1)
    best = np.argmax(d2, axis=1)
    out = np.empty((2 * s, k, r))
    for idx, (i, j) in enumerate(pairs):
        mask = best == idx
        if not mask.any():
            continue
        v = verts[mask]
        mid = 0.5 * (v[:, i] + v[:, j])
        a = v.copy()
        a[:, i] = mid
        b = v.copy()
        b[:, j] = mid
        cnt = mask.sum()
        pos = np.flatnonzero(mask)
        out[2 * pos] = a
        out[2 * pos + 1] = b
    return out


def futaki_numeric(polytope: DelzantPolytope, u: SymplecticPotential, v, w,
                   ell: AffineFunction, grid: GridSpec = None) -> FutakiReport:
    """Metric-side Futaki value: integral of (Scal_v - w) * ell over the polytope.

    Integration uses the embedded cubature pair on a refined triangulation
    whose nodes are strictly interior, so no boundary truncation is needed;
    the error estimate is the discrepancy between the paired rules.
    """
    if grid is None:
        grid = GridSpec()
    v = as_weight(v, polytope.dim)
    w = as_weight(w, polytope.dim)

    def integrand(x):
        return (scal_v_divergence(u, v, x, h=grid.h) - w.eval(x)) * ell.eval(x)

    nodes_hi, wts_hi = _refined_nodes(polytope, grid.resolution, GM_ORDER_HIGH)
    value = float(wts_hi @ integrand(nodes_hi))
    nodes_lo, wts_lo = _refined_nodes(polytope, grid.resolution, GM_ORDER_LOW)
    low = float(wts_lo @ integrand(nodes_lo))
    return FutakiReport(
        direction=ell,
        value=value,
        method="metric_numeric",
        normalization="polytope",
        error_estimate=abs(value - low),
    )
