"""Subdivision quadrature on convex polygons.

A polygon is split either into n triangles (fanned from the vertex mean) or
into n quadrilaterals (vertex mean joined to the edge midpoints), and a rule
of the requested polynomial degree of exactness is placed on each physical
subdomain:

* order 1: one point at the subdomain's area centroid (weight = area), which
  integrates affine functions exactly on any subdomain and yields exactly n
  points per polygon;
* order >= 2 on triangles: conical-product Gauss-Jacobi x Gauss-Legendre;
* order >= 2 on quadrilaterals: tensor Gauss-Legendre under the bilinear map,
  with ceil((order + 2) / 2) points per direction so that the non-constant
  Jacobian does not eat into the degree of exactness.

The module also provides the divergence-theorem monomial integrator used as
an independent oracle, and the basis-gradient integration-error diagnostic.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.special import roots_jacobi

from .basis import WachspressBasis
from .errors import DegenerateQuad, UnsupportedOrder
from .geometry import Polygon

TRIANGULATION = "triangulation"
QUADRANGULATION = "quadrangulation"
SCHEMES = (TRIANGULATION, QUADRANGULATION)


@dataclass(frozen=True)
class QuadratureRule:
    """Points and weights on one polygon (weights carry area units)."""

    points: np.ndarray
    weights: np.ndarray
    scheme: str
    order: int

    def __post_init__(self):
        self.points.setflags(write=False)
        self.weights.setflags(write=False)

    @property
    def n_points(self):
        return self.weights.size


def subdivide_triangulation(p: Polygon):
    """Fan of n triangles from the vertex mean; (n, 3, 2) array."""
    v, c = p.vertices, p.vertex_mean
    nxt = np.roll(v, -1, axis=0)
    return np.stack([np.broadcast_to(c, v.shape), v, nxt], axis=1)


def subdivide_quadrangulation(p: Polygon):
    """n quadrilaterals (mean, midpoint_i, vertex_{i+1}, midpoint_{i+1}); (n, 4, 2)."""
    c, mid = p.vertex_mean, p.edge_midpoints
    nxt = np.roll(p.vertices, -1, axis=0)
    quads = np.stack([np.broadcast_to(c, nxt.shape), mid, nxt,
                      np.roll(mid, -1, axis=0)], axis=1)
    areas = _shoelace(quads)
    if (areas < 1e-14 * p.area).any():
        raise DegenerateQuad(f"quadrangulation produced a subdomain of area {areas.min():g}")
    return quads


def _shoelace(polys):
    """Signed areas of a (..., k, 2) stack of polygons."""
    x, y = polys[..., 0], polys[..., 1]
    xn, yn = np.roll(x, -1, axis=-1), np.roll(y, -1, axis=-1)
    return 0.5 * (x * yn - xn * y).sum(axis=-1)


def _centroids(polys):
    x, y = polys[..., 0], polys[..., 1]
    xn, yn = np.roll(x, -1, axis=-1), np.roll(y, -1, axis=-1)
    cr = x * yn - xn * y
    a = 0.5 * cr.sum(axis=-1)
    cx = ((x + xn) * cr).sum(axis=-1) / (6.0 * a)
    cy = ((y + yn) * cr).sum(axis=-1) / (6.0 * a)
    return np.stack([cx, cy], axis=-1), a


@lru_cache(maxsize=None)
def _gauss01(n):
    x, w = leggauss(n)
    x, w = 0.5 * (x + 1.0), 0.5 * w
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _gauss_sym(n):
    x, w = leggauss(n)
    x.setflags(write=False)
    w.setflags(write=False)
    return x, w


@lru_cache(maxsize=None)
def _triangle_reference_rule(order):
    """Conical-product rule on the triangle (0,0),(1,0),(0,1), exact to ``order``."""
    npt = (order + 2) // 2  # ceil((order + 1) / 2)
    xj, wj = roots_jacobi(npt, 1.0, 0.0)        # weight (1 - x) on [-1, 1]
    xi, wi = 0.5 * (xj + 1.0), 0.25 * wj        # weight (1 - u) on [0, 1]
    eta, we = _gauss01(npt)
    X = np.repeat(xi, npt)
    Y = np.tile(eta, npt) * (1.0 - X)
    W = np.repeat(wi, npt) * np.tile(we, npt)
    pts = np.column_stack([X, Y])
    pts.setflags(write=False)
    W.setflags(write=False)
    return pts, W


def _rule_on_triangles(tris, order):
    areas = _shoelace(tris)
    if order == 1:
        pts = tris.mean(axis=1)
        return pts, areas
    ref, wref = _triangle_reference_rule(order)
    v0 = tris[:, 0]
    e1, e2 = tris[:, 1] - v0, tris[:, 2] - v0
    pts = (v0[:, None, :] + ref[None, :, 0, None] * e1[:, None, :]
           + ref[None, :, 1, None] * e2[:, None, :])
    w = 2.0 * areas[:, None] * wref[None, :]
    return pts.reshape(-1, 2), w.ravel()


def _rule_on_quads(quads, order):
    if order == 1:
        pts, areas = _centroids(quads)
        return pts, areas
    npt = (order + 3) // 2  # ceil((order + 2) / 2): one extra degree for det(DF)
    x1, w1 = _gauss_sym(npt)
    XI, ETA = np.meshgrid(x1, x1, indexing="ij")
    xi, eta = XI.ravel(), ETA.ravel()
    wt = np.outer(w1, w1).ravel()
    shp = 0.25 * np.stack([(1 - xi) * (1 - eta), (1 + xi) * (1 - eta),
                           (1 + xi) * (1 + eta), (1 - xi) * (1 + eta)])
    dxi = 0.25 * np.stack([-(1 - eta), (1 - eta), (1 + eta), -(1 + eta)])
    deta = 0.25 * np.stack([-(1 - xi), -(1 + xi), (1 + xi), (1 - xi)])
    pts = np.einsum("cq,ncd->nqd", shp, quads)
    jx = np.einsum("cq,ncd->nqd", dxi, quads)
    jy = np.einsum("cq,ncd->nqd", deta, quads)
    det = jx[..., 0] * jy[..., 1] - jx[..., 1] * jy[..., 0]
    w = det * wt[None, :]
    return pts.reshape(-1, 2), w.ravel()


def rule_on_polygon(p: Polygon, scheme: str, order: int) -> QuadratureRule:
    """Composite rule exact to degree ``order`` on each subdomain of ``p``."""
    if not isinstance(order, (int, np.integer)) or order < 1:
        raise UnsupportedOrder(order)
    if scheme == TRIANGULATION:
        pts, w = _rule_on_triangles(subdivide_triangulation(p), order)
    elif scheme == QUADRANGULATION:
        pts, w = _rule_on_quads(subdivide_quadrangulation(p), order)
    else:
        raise ValueError(f"unknown scheme {scheme!r}; expected one of {SCHEMES}")
    return QuadratureRule(points=pts, weights=w, scheme=scheme, order=int(order))


def integrate(rule: QuadratureRule, f):
    """Weighted sum of ``f`` over the rule points; f maps (npts, 2) -> values."""
    vals = np.asarray(f(rule.points))
    return np.tensordot(rule.weights, vals, axes=(0, 0))


def monomial_integral(p: Polygon, a: int, b: int) -> float:
    """Exact integral of x^a y^b over the polygon via the divergence theorem.

    The boundary reduction makes each edge contribution a 1D polynomial of
    degree a + b + 1 in the edge parameter, integrated with Gauss-Legendre of
    sufficient order.  Independent of the 2D rules above, by design.
    """
    t, wt = _gauss01((a + b + 2) // 2 + 1)
    v = p.vertices
    nxt = np.roll(v, -1, axis=0)
    x = v[:, None, 0] + t[None, :] * (nxt[:, None, 0] - v[:, None, 0])
    y = v[:, None, 1] + t[None, :] * (nxt[:, None, 1] - v[:, None, 1])
    # n_x ds = dy
    integrand = x ** (a + 1) / (a + 1) * y**b
    dy = (nxt[:, 1] - v[:, 1])[:, None]
    return float((integrand * dy * wt[None, :]).sum())


def exact_gradient_integrals(p: Polygon):
    """Closed-form integral of each Wachspress-coordinate gradient over p.

    Uses the boundary identity: the volume integral of a gradient equals the
    boundary integral of the (piecewise linear) trace times the outward
    normal, which reduces to half the sum of the two adjacent scaled edge
    normals.
    """
    sn = p.scaled_normals
    return 0.5 * (np.roll(sn, 1, axis=0) + sn)


def gradient_integration_error(p: Polygon, rule: QuadratureRule, basis=None) -> float:
    """Worst-case (over the shape functions) gradient quadrature error.

    Maximum Euclidean norm of the difference between the exact gradient
    integral (boundary closed form) and the quadrature sum.
    """
    if basis is None:
        basis = WachspressBasis(p)
    exact = exact_gradient_integrals(p)
    approx = np.einsum("q,qid->id", rule.weights, basis.gradients(rule.points))
    return float(np.linalg.norm(exact - approx, axis=1).max())
