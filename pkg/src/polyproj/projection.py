"""Element-level polynomial projection and the three stiffness constructions.

For a basis {phi_i} on an element E and a mean-centered polynomial basis
{1, p_1, ..., p_np} of degree m, the key matrices are

    N[i, a] = p_a(node_i)
    R[i, a] = -(quadrature) int_E phi_i Div(K grad p_a)
              + (exact) int_dE phi_i (K grad p_a) . n ds
    G = N^T R            (Gram matrix of the p_a in the energy product)
    S = R G^{-1}         (projection coefficients: Pi phi_i = 1/n_v + sum_b S[i,b] p_b)
    P = I - U/n_v - S N^T

and the stiffness variants

    quadrature:  K_quad[k, l] = (quadrature) int_E grad phi_k . K grad phi_l
    projected:   K_elem = R G^{-1} R^T + P K_quad P^T
    corrected:   K_elem = R G^{-1} R^T + P Kbar P^T + (Ktilde - Kbar)

where, for a variable tensor, Kbar uses the element average K_E and Ktilde
samples K(x) at the quadrature points.  The projected form is polynomially
consistent (K_elem N = R) for any rule order with m = 1, and for rules exact
on degree-2 subdomain polynomials with m = 2.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InsufficientQuadrature, NonSPD, SingularGram
from .geometry import Polygon
from .quadrature import QUADRANGULATION, QuadratureRule, _gauss01, rule_on_polygon

GRAM_COND_LIMIT = 1e12


class DiffusionTensor:
    """Symmetric positive definite diffusion tensor, constant or spatially varying."""

    def __init__(self, constant=None, fn: Optional[Callable] = None, name="K"):
        if (constant is None) == (fn is None):
            raise ValueError("give exactly one of a constant matrix or a field function")
        self._fn = fn
        self.name = name
        if constant is not None:
            mat = np.asarray(constant, dtype=float)
            if mat.shape != (2, 2) or not np.allclose(mat, mat.T):
                raise ValueError("constant tensor must be a symmetric 2x2 matrix")
            self.constant = mat
        else:
            self.constant = None

    @classmethod
    def identity(cls):
        return cls(constant=np.eye(2), name="identity")

    @classmethod
    def from_function(cls, fn, name="K(x)"):
        """fn maps an (npts, 2) array of points to an (npts, 2, 2) array."""
        return cls(fn=fn, name=name)

    @property
    def is_constant(self):
        return self.constant is not None

    def __call__(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        if self.is_constant:
            return np.broadcast_to(self.constant, (pts.shape[0], 2, 2))
        return np.asarray(self._fn(pts), dtype=float)

    def element_average(self, rule: QuadratureRule):
        """Rule average over an element: the constant first-order surrogate K_E."""
        if self.is_constant:
            return self.constant
        vals = self(rule.points)
        avg = np.einsum("q,qab->ab", rule.weights, vals) / rule.weights.sum()
        avg = 0.5 * (avg + avg.T)
        _check_spd(avg)
        return avg

    def spot_check(self, pts, alpha):
        """Verify eigenvalues lie in [1/alpha, alpha] at the given points."""
        eig = np.linalg.eigvalsh(self(pts))
        return bool((eig >= 1.0 / alpha - 1e-12).all() and (eig <= alpha + 1e-12).all())


def _check_spd(mat):
    eig = np.linalg.eigvalsh(0.5 * (mat + mat.T))
    if eig.min() <= 0.0:
        raise NonSPD(f"tensor average has eigenvalues {eig}")


def identity_tensor() -> DiffusionTensor:
    return DiffusionTensor.identity()


def as_tensor(K) -> DiffusionTensor:
    if isinstance(K, DiffusionTensor):
        return K
    return DiffusionTensor(constant=np.asarray(K, dtype=float))


# ---------------------------------------------------------------------------
# polynomial basis


class PolynomialBasis:
    """Monomial basis of degree m with zero mean over the element's dof nodes.

    The non-constant members are, in coordinates centered at the vertex mean
    and scaled by the diameter: X, Y for m = 1, plus X^2 - c1, XY - c2,
    Y^2 - c3 for m = 2, with the constants chosen so each nodal mean
    vanishes.  The diameter scaling keeps the Gram conditioning independent
    of element size.
    """

    def __init__(self, polygon: Polygon, order: int, dof_points):
        if order not in (1, 2):
            raise ValueError(f"order must be 1 or 2, got {order}")
        self.polygon = polygon
        self.order = order
        self.dof_points = np.asarray(dof_points, dtype=float)
        self.center = polygon.vertex_mean
        self.scale = polygon.diameter
        self.n_terms = 2 if order == 1 else 5

        s = (self.dof_points - self.center) / self.scale
        if order == 2:
            self._quad_means = np.array([
                (s[:, 0] ** 2).mean(), (s[:, 0] * s[:, 1]).mean(), (s[:, 1] ** 2).mean()])
        nodal = self.values(self.dof_points)
        assert np.abs(nodal.mean(axis=0)).max() < 1e-13

    def _scaled(self, pts):
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        return (pts - self.center) / self.scale

    def values(self, pts):
        """(npts, n_terms) values of p_1..p_np (the constant 1 is implicit)."""
        s = self._scaled(pts)
        cols = [s[:, 0], s[:, 1]]
        if self.order == 2:
            cols += [s[:, 0] ** 2 - self._quad_means[0],
                     s[:, 0] * s[:, 1] - self._quad_means[1],
                     s[:, 1] ** 2 - self._quad_means[2]]
        return np.column_stack(cols)

    def gradients(self, pts):
        """(npts, n_terms, 2) gradients."""
        s = self._scaled(pts)
        npts = s.shape[0]
        out = np.zeros((npts, self.n_terms, 2))
        out[:, 0, 0] = 1.0 / self.scale
        out[:, 1, 1] = 1.0 / self.scale
        if self.order == 2:
            out[:, 2, 0] = 2.0 * s[:, 0] / self.scale
            out[:, 3, 0] = s[:, 1] / self.scale
            out[:, 3, 1] = s[:, 0] / self.scale
            out[:, 4, 1] = 2.0 * s[:, 1] / self.scale
        return out

    def hessians(self):
        """(n_terms, 2, 2) constant Hessians."""
        out = np.zeros((self.n_terms, 2, 2))
        if self.order == 2:
            h2 = 1.0 / self.scale**2
            out[2] = [[2 * h2, 0], [0, 0]]
            out[3] = [[0, h2], [h2, 0]]
            out[4] = [[0, 0], [0, 2 * h2]]
        return out

    def div_flux_constants(self, K2x2):
        """Div(K grad p_a) for a constant tensor; an (n_terms,) vector."""
        return np.einsum("ab,tab->t", np.asarray(K2x2, dtype=float), self.hessians())


def polynomial_basis(basis) -> PolynomialBasis:
    """Mean-centered polynomial basis matching a shape-function basis."""
    return PolynomialBasis(basis.polygon, basis.order, basis.dof_points)


# ---------------------------------------------------------------------------
# element matrices


def matrix_N(basis, poly: PolynomialBasis):
    """Nodal values of the polynomial basis: N[i, a] = p_a(node_i)."""
    return poly.values(basis.dof_points)


def matrix_R(basis, poly: PolynomialBasis, K_E, rule: QuadratureRule):
    """Right-hand-side matrix of the projection problem.

    The boundary term is integrated exactly on each edge with Gauss-Legendre
    (the integrand is a polynomial of degree 2m - 1 in the edge parameter);
    the area term vanishes for m = 1 and is evaluated with ``rule`` for
    m = 2, which must then be exact on degree-2 subdomain polynomials.
    """
    K_E = np.asarray(K_E, dtype=float)
    p = basis.polygon
    t, wt = _gauss01(2 if basis.order == 1 else 3)

    R = np.zeros((basis.n_dofs, poly.n_terms))
    for e in range(p.n):
        x = p.vertices[e] + np.outer(t, p.edges[e])
        trace = basis.edge_trace(e, t)                        # (nt, n_dofs)
        flux_n = np.einsum("qtd,d->qt", poly.gradients(x) @ K_E.T, p.scaled_normals[e])
        R += np.einsum("q,qi,qt->it", wt, trace, flux_n)

    if basis.order == 2:
        if rule.order < 2:
            raise InsufficientQuadrature(
                f"quadratic elements need a rule of degree >= 2, got {rule.order}")
        c = poly.div_flux_constants(K_E)
        phi_int = np.einsum("q,qi->i", rule.weights, basis.values(rule.points))
        R -= np.outer(phi_int, c)
    return R


def projector(N, R):
    """Gram matrix, projection coefficients S, and the remainder map P.

    Raises :class:`SingularGram` when G = N^T R is numerically singular.
    """
    G = N.T @ R
    cond = np.linalg.cond(G)
    if not np.isfinite(cond) or cond > GRAM_COND_LIMIT:
        raise SingularGram(cond)
    S = np.linalg.solve(G.T, R.T).T
    n_v = N.shape[0]
    P = np.eye(n_v) - np.full((n_v, n_v), 1.0 / n_v) - S @ N.T
    return G, S, P


def project_nodal(poly: PolynomialBasis, S, v):
    """Projection of a nodal vector onto degree-m polynomials.

    Returns ``(constant, coeffs)`` such that the projected polynomial is
    ``constant + coeffs . (p_1, ..., p_np)``; the constant is fixed by
    matching the nodal mean.
    """
    v = np.asarray(v, dtype=float)
    return float(v.mean()), S.T @ v


def evaluate_projection(poly: PolynomialBasis, const, coeffs, pts):
    return const + poly.values(pts) @ coeffs


def projection_gradient(poly: PolynomialBasis, coeffs, pts):
    return np.einsum("t,qtd->qd", coeffs, poly.gradients(pts))


@dataclass
class ElementMatrices:
    """All per-element projection data plus the final stiffness."""

    N: np.ndarray
    R: np.ndarray
    G: np.ndarray
    S: np.ndarray
    P: np.ndarray
    K_quad: np.ndarray
    K_elem: np.ndarray


def stiffness_quadrature(basis, K, rule: QuadratureRule):
    """Raw quadrature stiffness: weighted sum of grad phi . K grad phi."""
    K = as_tensor(K)
    grads = basis.gradients(rule.points)
    kg = np.einsum("qab,qib->qia", K(rule.points), grads)
    return np.einsum("q,qia,qja->ij", rule.weights, grads, kg)


def stiffness_projected(basis, poly: PolynomialBasis, K_E, rule: QuadratureRule) -> ElementMatrices:
    """Projection-split stiffness for a constant tensor K_E."""
    K_E = np.asarray(K_E, dtype=float)
    N = matrix_N(basis, poly)
    R = matrix_R(basis, poly, K_E, rule)
    G, S, P = projector(N, R)
    K_quad = stiffness_quadrature(basis, K_E, rule)
    K_elem = S @ R.T + P @ K_quad @ P.T
    return ElementMatrices(N=N, R=R, G=G, S=S, P=P, K_quad=K_quad, K_elem=K_elem)


def stiffness_corrected(basis, poly: PolynomialBasis, K: DiffusionTensor,
                        rule: QuadratureRule) -> ElementMatrices:
    """Projection-split stiffness with the variable-coefficient correction.

    K_E is the rule average of the tensor; the correction adds the sampled
    difference between the true-tensor and averaged-tensor quadrature
    stiffnesses, so a constant field reproduces the projected form exactly.
    """
    K = as_tensor(K)
    K_E = K.element_average(rule)
    data = stiffness_projected(basis, poly, K_E, rule)
    K_tilde = stiffness_quadrature(basis, K, rule)
    K_elem = data.K_elem + (K_tilde - data.K_quad)
    return ElementMatrices(N=data.N, R=data.R, G=data.G, S=data.S, P=data.P,
                           K_quad=K_tilde, K_elem=K_elem)


def element_stiffness(basis, mode, K, rule: QuadratureRule):
    """Dispatch on ``mode`` in {"quadrature", "projected", "corrected"}."""
    K = as_tensor(K)
    if mode == "quadrature":
        return stiffness_quadrature(basis, K, rule)
    poly = polynomial_basis(basis)
    if mode == "projected":
        K_E = K.constant if K.is_constant else K.element_average(rule)
        return stiffness_projected(basis, poly, K_E, rule).K_elem
    if mode == "corrected":
        if K.is_constant:
            raise ValueError("corrected mode expects a variable tensor field")
        return stiffness_corrected(basis, poly, K, rule).K_elem
    raise ValueError(f"unknown form mode {mode!r}")


def stability_bounds(K_elem, basis, K, ref_order=32, scheme=QUADRANGULATION):
    """Generalized eigenvalue bounds of K_elem against a near-exact stiffness.

    Both forms are restricted to the orthogonal complement of the constants
    (their common kernel); returns (c1, c2) = (min, max) eigenvalue.
    """
    from scipy.linalg import eigh, null_space

    K_ref = stiffness_quadrature(basis, K, rule_on_polygon(basis.polygon, scheme, ref_order))
    Q = null_space(np.ones((1, basis.n_dofs)))
    vals = eigh(Q.T @ K_elem @ Q, Q.T @ K_ref @ Q, eigvals_only=True)
    return float(vals.min()), float(vals.max())
