"""Shape functions on a convex polygon.

Two families are provided:

* :class:`WachspressBasis` -- rational barycentric coordinates built from
  triangle-area ratios.  One dof per vertex, linear traces on the boundary,
  linear precision.
* :class:`SerendipityBasis` -- quadratic functions assembled from pairwise
  products of the Wachspress coordinates.  One dof per vertex plus one per
  edge midpoint (dimension 2n), quadratic traces, quadratic precision.

Interior evaluation uses the rational formulas and refuses points on (or
outside) the boundary; boundary values always go through the closed-form
edge traces, which avoids the 0/0 of the interior weights.
"""

from __future__ import annotations

import numpy as np

from .errors import IllConditioned, PointNotOnBoundary, PointOnBoundary
from .geometry import Polygon

# points closer than this (relative to the diameter) to an edge line are
# treated as not-strictly-interior
INTERIOR_REL_TOL = 1e-12

# serendipity coefficient matrices keyed by normalized vertex geometry
_COEFFICIENT_CACHE: dict[bytes, np.ndarray] = {}


class WachspressBasis:
    """Wachspress coordinates and their analytic gradients on one polygon."""

    order = 1

    def __init__(self, polygon: Polygon):
        self.polygon = polygon
        self.n_dofs = polygon.n
        self.dof_points = polygon.vertices
        v = polygon.vertices
        prv, nxt = np.roll(v, 1, axis=0), np.roll(v, -1, axis=0)
        # area of the corner triangle (x_{i-1}, x_i, x_{i+1})
        self._corner = 0.5 * np.abs(
            (v[:, 0] - prv[:, 0]) * (nxt[:, 1] - prv[:, 1])
            - (nxt[:, 0] - prv[:, 0]) * (v[:, 1] - prv[:, 1]))
        # gradient of the edge-triangle area A_j(x) is constant: half the
        # inward-rotated edge vector
        self._grad_area = 0.5 * np.column_stack([-polygon.edges[:, 1], polygon.edges[:, 0]])

    def _edge_areas(self, pts):
        """A_j(x) = area of triangle (x_j, x_{j+1}, x); (npts, n), must be > 0."""
        p = self.polygon
        rel = pts[:, None, :] - p.vertices[None, :, :]
        areas = 0.5 * (p.edges[None, :, 0] * rel[:, :, 1] - p.edges[None, :, 1] * rel[:, :, 0])
        limit = 0.5 * INTERIOR_REL_TOL * p.diameter * p.edge_lengths[None, :]
        if (areas <= limit).any():
            raise PointOnBoundary("evaluation point is not strictly inside the polygon")
        return areas

    def values(self, pts):
        """Coordinate values at strictly interior points; shape (npts, n)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        areas = self._edge_areas(pts)
        w = self._corner[None, :] / (np.roll(areas, 1, axis=1) * areas)
        return w / w.sum(axis=1, keepdims=True)

    def gradients(self, pts):
        """Analytic gradients at strictly interior points; shape (npts, n, 2)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        areas = self._edge_areas(pts)
        w = self._corner[None, :] / (np.roll(areas, 1, axis=1) * areas)
        phi = w / w.sum(axis=1, keepdims=True)
        # d(log w_i) = -dA_{i-1}/A_{i-1} - dA_i/A_i
        ratios = self._grad_area[None, :, :] / areas[:, :, None]
        dlogw = -(np.roll(ratios, 1, axis=1) + ratios)
        mean = np.einsum("qi,qid->qd", phi, dlogw)
        return phi[:, :, None] * (dlogw - mean[:, None, :])

    def edge_trace(self, edge, ts):
        """Values on edge (v_i, v_{i+1}) at parameters ts in [0, 1]; (nt, n)."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        out = np.zeros((ts.size, self.polygon.n))
        out[:, edge] = 1.0 - ts
        out[:, (edge + 1) % self.polygon.n] = ts
        return out

    def trace(self, point):
        """Values at a boundary point (found on a closed edge segment)."""
        edge, t = locate_on_boundary(self.polygon, point)
        return self.edge_trace(edge, [t])[0]


def locate_on_boundary(polygon: Polygon, point):
    """Return (edge index, parameter) for a point on the boundary."""
    point = np.asarray(point, dtype=float)
    tol = INTERIOR_REL_TOL * polygon.diameter
    dists = polygon.edge_distances(point[None, :])[0]
    for i in np.argsort(np.abs(dists)):
        if abs(dists[i]) > tol:
            break
        t = np.dot(point - polygon.vertices[i], polygon.edges[i]) / polygon.edge_lengths[i] ** 2
        if -tol <= t <= 1.0 + tol:
            return int(i), float(min(max(t, 0.0), 1.0))
    raise PointNotOnBoundary("point does not lie on any edge of the polygon")


class SerendipityBasis:
    """Quadratic shape functions from pairwise Wachspress products.

    The 2n functions are linear combinations ``psi_i = sum_k C[i, k] q_k`` of
    the n(n+1)/2 products ``q_k = phi_a phi_b`` (a <= b).  The coefficient
    matrix is the minimum-norm solution of the interpolation conditions at
    the 2n nodes combined with coefficient matching against the product
    expansions of the six quadratic monomials, which makes the quadratic
    precision hold identically rather than only at sample points.
    """

    order = 2
    # residual above this (after the least-squares solve) means the
    # constraints could not actually be met
    RESIDUAL_TOL = 1e-9
    COND_LIMIT = 1e12

    def __init__(self, polygon: Polygon):
        self.polygon = polygon
        self.linear = WachspressBasis(polygon)
        n = polygon.n
        self.n_dofs = 2 * n
        self.dof_points = np.vstack([polygon.vertices, polygon.edge_midpoints])
        a, b = np.triu_indices(n)
        self._pair_a, self._pair_b = a, b
        # the coefficient matrix is similarity-invariant, so congruent
        # elements (ubiquitous in structured meshes) share one solve
        key = np.round((polygon.vertices - polygon.vertex_mean) / polygon.diameter,
                       12).tobytes()
        cached = _COEFFICIENT_CACHE.get(key)
        if cached is None:
            cached = _COEFFICIENT_CACHE[key] = self._solve_coefficients()
        self.coefficients = cached

    def _node_traces(self):
        """Wachspress values at the 2n nodes, via the exact boundary traces."""
        n = self.polygon.n
        tv = np.zeros((2 * n, n))
        tv[:n] = np.eye(n)
        for i in range(n):
            tv[n + i, i] = 0.5
            tv[n + i, (i + 1) % n] = 0.5
        return tv

    def _products(self, phi):
        return phi[..., self._pair_a] * phi[..., self._pair_b]

    def _solve_coefficients(self):
        p = self.polygon
        n = p.n
        nv, m = 2 * n, self._pair_a.size

        node_q = self._products(self._node_traces())              # (nv, m)

        # scaled coordinates keep the system conditioning size-independent
        scaled = (self.dof_points - p.vertex_mean) / p.diameter
        x, y = scaled[:, 0], scaled[:, 1]
        node_mono = np.stack([np.ones(nv), x, y, x * x, x * y, y * y])   # (6, nv)

        # product expansions of the monomials: 1 = (sum phi)^2, x = (sum x_a phi_a)(sum phi),
        # x^2 = (sum x_a phi_a)^2, ... ; symmetrized onto the a <= b product list
        sv = (p.vertices - p.vertex_mean) / p.diameter
        xa, ya = sv[:, 0], sv[:, 1]
        one = np.ones(n)

        def expand(fa, fb):
            coeff = np.outer(fa, fb)
            coeff = 0.5 * (coeff + coeff.T)
            out = coeff[self._pair_a, self._pair_b].astype(float)
            out[self._pair_a != self._pair_b] *= 2.0
            return out

        mono_q = np.stack([
            expand(one, one), expand(xa, one), expand(ya, one),
            expand(xa, xa), expand(xa, ya), expand(ya, ya),
        ])                                                        # (6, m)

        # unknown C is (nv, m); stack Kronecker-delta rows and precision rows
        big = np.vstack([np.kron(np.eye(nv), node_q),             # C @ node_q.T = I
                         np.kron(node_mono, np.eye(m))])          # node_mono @ C = mono_q
        rhs = np.concatenate([np.eye(nv).ravel(), mono_q.ravel()])

        sol, _, rank, sval = np.linalg.lstsq(big, rhs, rcond=None)
        if rank == 0 or sval[0] / sval[rank - 1] > self.COND_LIMIT:
            raise IllConditioned(f"serendipity constraint system condition "
                                 f"{sval[0] / sval[max(rank - 1, 0)]:.3e} exceeds {self.COND_LIMIT:g}")
        C = sol.reshape(nv, m)

        resid = max(np.abs(C @ node_q.T - np.eye(nv)).max(),
                    np.abs(node_mono @ C - mono_q).max())
        if resid > self.RESIDUAL_TOL:
            raise IllConditioned(f"serendipity constraints unmet (residual {resid:.3e})")
        C.setflags(write=False)
        return C

    def values(self, pts):
        """Shape-function values at strictly interior points; (npts, 2n)."""
        phi = self.linear.values(pts)
        return self._products(phi) @ self.coefficients.T

    def gradients(self, pts):
        """Analytic gradients at strictly interior points; (npts, 2n, 2)."""
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        phi = self.linear.values(pts)
        dphi = self.linear.gradients(pts)
        dq = (phi[:, self._pair_a, None] * dphi[:, self._pair_b, :]
              + phi[:, self._pair_b, None] * dphi[:, self._pair_a, :])
        return np.einsum("ik,qkd->qid", self.coefficients, dq)

    def edge_trace(self, edge, ts):
        """Boundary values on edge ``edge``; quadratic in the edge parameter."""
        tv = self.linear.edge_trace(edge, ts)
        return self._products(tv) @ self.coefficients.T

    def trace(self, point):
        edge, t = locate_on_boundary(self.polygon, point)
        return self.edge_trace(edge, [t])[0]


def element_basis(polygon: Polygon, order: int):
    """Build the shape-function evaluator of the requested order (1 or 2)."""
    if order == 1:
        return WachspressBasis(polygon)
    if order == 2:
        return SerendipityBasis(polygon)
    raise ValueError(f"order must be 1 or 2, got {order}")


def interior_points(polygon: Polygon, count, margin_rel=1e-3, seed=None):
    """Low-discrepancy sample of strictly interior points.

    Halton points in the bounding box are rejected against the polygon with
    an absolute margin of ``margin_rel * diameter`` from every edge, which
    keeps finite-difference stencils of comparable step size interior too.
    The sequence is deterministic unless ``seed`` is given.
    """
    from scipy.stats import qmc

    sampler = qmc.Halton(d=2, scramble=seed is not None, seed=seed)
    lo = polygon.vertices.min(axis=0)
    hi = polygon.vertices.max(axis=0)
    margin = margin_rel * polygon.diameter
    out = np.empty((0, 2))
    while out.shape[0] < count:
        cand = lo + sampler.random(4 * count) * (hi - lo)
        keep = polygon.contains(cand, margin=margin)
        out = np.vstack([out, cand[keep]])
    return out[:count]
