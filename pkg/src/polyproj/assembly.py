"""Global assembly, Dirichlet conditions, linear solve, and error norms.

Element contributions are computed independently (pure functions of the
element data) and merged in element order, so assembly is deterministic:
identical inputs yield bitwise-identical matrices.  The solver path is
single-threaded sparse Cholesky-like direct factorization with a conjugate
gradient fallback.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from typing import Callable

import numpy as np
import scipy.sparse as sps
import scipy.sparse.linalg as spla

from .basis import element_basis
from .errors import PolyProjError, SolverDiverged
from .geometry import PolygonalMesh
from .projection import DiffusionTensor, as_tensor, element_stiffness
from .quadrature import QUADRANGULATION, rule_on_polygon

ERROR_NORM_ORDER = 10  # degree of the quadrangulation rule used for norms


@dataclass
class ExactSolution:
    """Manufactured solution bundle: u, its gradient, the source, the tensor.

    ``u`` and ``source`` map (npts, 2) -> (npts,); ``grad`` maps
    (npts, 2) -> (npts, 2).  Boundary data is the trace of ``u``.
    """

    name: str
    u: Callable
    grad: Callable
    source: Callable
    tensor: DiffusionTensor

    def flux_divergence_residual(self, pts, step=1e-5):
        """max |  -div(K grad u) - f | with the divergence taken by central
        differences of the analytic flux; the manufactured-solution audit."""
        pts = np.asarray(pts, dtype=float)

        def flux(x):
            return np.einsum("qab,qb->qa", self.tensor(x), self.grad(x))

        ex, ey = np.array([step, 0.0]), np.array([0.0, step])
        div = ((flux(pts + ex)[:, 0] - flux(pts - ex)[:, 0])
               + (flux(pts + ey)[:, 1] - flux(pts - ey)[:, 1])) / (2.0 * step)
        return float(np.abs(-div - self.source(pts)).max())


@dataclass
class GlobalSystem:
    """Assembled (unconstrained) system; A . 1 = 0 before boundary conditions."""

    mesh: PolygonalMesh
    m: int
    A: sps.csr_matrix
    b: np.ndarray
    dirichlet: dict = field(default_factory=dict)


@dataclass
class ReducedSystem:
    """Dirichlet-eliminated system on the free dofs."""

    A_ff: sps.csr_matrix
    rhs: np.ndarray
    free: np.ndarray
    fixed: np.ndarray
    fixed_values: np.ndarray
    n_dofs: int


def _element_setup(mesh, m, e, scheme, order):
    poly = mesh.element_polygon(e)
    basis = element_basis(poly, m)
    rule = rule_on_polygon(poly, scheme, order)
    return poly, basis, rule


def _check_mesh_order(mesh, m):
    if m == 2 and mesh.midside is None:
        raise ValueError("quadratic assembly needs a mesh with midside nodes "
                         "(see add_midside_nodes)")
    if m == 1 and mesh.midside is not None:
        raise ValueError("linear assembly expects a mesh without midside nodes")


def assemble(mesh: PolygonalMesh, m: int, mode: str, scheme: str, order: int,
             K) -> GlobalSystem:
    """Assemble the global stiffness for the requested form mode.

    mode is one of "quadrature" (raw quadrature bilinear form), "projected"
    (consistency + stability split; a variable tensor is replaced by its
    element average), or "corrected" (projected plus the sampled-difference
    correction; requires a variable tensor).
    """
    _check_mesh_order(mesh, m)
    K = as_tensor(K)
    rows, cols, vals = [], [], []
    for e in range(mesh.n_elements):
        _, basis, rule = _element_setup(mesh, m, e, scheme, order)
        try:
            ke = element_stiffness(basis, mode, K, rule)
        except PolyProjError as err:
            err.args = (f"element {e}: {err}",)
            raise
        dofs = mesh.element_dofs(e)
        idx = np.repeat(dofs, dofs.size), np.tile(dofs, dofs.size)
        rows.append(idx[0])
        cols.append(idx[1])
        vals.append(ke.ravel())
    n = mesh.n_nodes
    A = sps.coo_matrix((np.concatenate(vals), (np.concatenate(rows), np.concatenate(cols))),
                       shape=(n, n)).tocsr()
    return GlobalSystem(mesh=mesh, m=m, A=A, b=np.zeros(n))


def load_vector(mesh: PolygonalMesh, m: int, f, scheme: str, order: int):
    """Quadrature load vector b_i = sum_E (rule sum of f phi_i)."""
    _check_mesh_order(mesh, m)
    b = np.zeros(mesh.n_nodes)
    for e in range(mesh.n_elements):
        _, basis, rule = _element_setup(mesh, m, e, scheme, order)
        fe = np.einsum("q,q,qi->i", rule.weights, f(rule.points), basis.values(rule.points))
        b[mesh.element_dofs(e)] += fe
    return b


def apply_dirichlet(system: GlobalSystem, g) -> ReducedSystem:
    """Eliminate boundary dofs symmetrically (known columns move to the rhs)."""
    mesh = system.mesh
    fixed = np.array(sorted(mesh.boundary_nodes), dtype=int)
    fixed_values = np.asarray(g(mesh.nodes[fixed]), dtype=float)
    free = np.setdiff1d(np.arange(mesh.n_nodes), fixed)
    A = system.A.tocsc()
    A_ff = A[free][:, free].tocsr()
    A_fc = A[free][:, fixed]
    rhs = system.b[free] - A_fc @ fixed_values
    system.dirichlet = dict(zip(fixed.tolist(), fixed_values.tolist()))
    return ReducedSystem(A_ff=A_ff, rhs=rhs, free=free, fixed=fixed,
                         fixed_values=fixed_values, n_dofs=mesh.n_nodes)


def solve(reduced: ReducedSystem, method: str = "auto"):
    """Solve the reduced system and scatter back to the full dof vector.

    Direct sparse factorization first; a conjugate-gradient fallback
    (rtol 1e-13, at most 10 n iterations) catches factorization failures.
    Raises :class:`SolverDiverged` if the relative residual stays above 1e-12.
    """
    A, rhs = reduced.A_ff, reduced.rhs
    scale = np.linalg.norm(rhs)
    u_f = None
    with warnings.catch_warnings():
        # a singular factorization is detected below and routed to the
        # fallback; the library warnings would only duplicate that signal
        warnings.simplefilter("ignore")
        if method in ("auto", "direct"):
            try:
                u_f = spla.spsolve(A, rhs)
            except RuntimeError:
                u_f = None
            if u_f is not None and not np.isfinite(np.atleast_1d(u_f)).all():
                u_f = None
            if method == "direct" and u_f is None:
                raise SolverDiverged("direct factorization failed")
        if u_f is None or _residual(A, u_f, rhs, scale) > 1e-12:
            n = A.shape[0]
            u_cg, info = spla.cg(A, rhs, rtol=1e-13, atol=0.0, maxiter=10 * max(n, 1))
            if info == 0 and _residual(A, u_cg, rhs, scale) <= 1e-12:
                u_f = u_cg
            elif u_f is None or _residual(A, u_f, rhs, scale) > 1e-12:
                best = u_f if u_f is not None else u_cg
                raise SolverDiverged(f"residual {_residual(A, best, rhs, scale):.3e} "
                                     f"above 1e-12 (cg info {info})")
    out = np.empty(reduced.n_dofs)
    out[reduced.free] = u_f
    out[reduced.fixed] = reduced.fixed_values
    return out


def _residual(A, u, rhs, scale):
    return np.linalg.norm(A @ u - rhs) / (scale if scale > 0.0 else 1.0)


def nodal_interpolant(mesh: PolygonalMesh, u):
    """Nodal values of a function over all dofs of the mesh."""
    return np.asarray(u(mesh.nodes), dtype=float)


def error_norms(mesh: PolygonalMesh, m: int, u_h, exact: ExactSolution,
                order: int = ERROR_NORM_ORDER):
    """Relative L2 and H1-seminorm errors of the discrete solution.

    Both numerator and denominator use the same per-element quadrangulation
    rule.  A vanishing denominator (constant exact solution) switches that
    norm to its absolute value.
    """
    _check_mesh_order(mesh, m)
    u_h = np.asarray(u_h, dtype=float)
    num0 = den0 = num1 = den1 = 0.0
    for e in range(mesh.n_elements):
        _, basis, rule = _element_setup(mesh, m, e, QUADRANGULATION, order)
        ue = u_h[mesh.element_dofs(e)]
        uh_vals = basis.values(rule.points) @ ue
        uh_grad = np.einsum("qid,i->qd", basis.gradients(rule.points), ue)
        ex_vals = exact.u(rule.points)
        ex_grad = exact.grad(rule.points)
        num0 += float(rule.weights @ (ex_vals - uh_vals) ** 2)
        den0 += float(rule.weights @ ex_vals**2)
        diff = ex_grad - uh_grad
        num1 += float(rule.weights @ (diff * diff).sum(axis=1))
        den1 += float(rule.weights @ (ex_grad * ex_grad).sum(axis=1))
    eps0 = np.sqrt(num0) / np.sqrt(den0) if den0 > 1e-300 else np.sqrt(num0)
    eps1 = np.sqrt(num1) / np.sqrt(den1) if den1 > 1e-300 else np.sqrt(num1)
    return float(eps0), float(eps1)


def solution_to_csv(mesh: PolygonalMesh, u_h, path):
    """Write ``node_id,x,y,u_h`` rows for a full solution vector."""
    with open(path, "w") as fh:
        fh.write("node_id,x,y,u_h\n")
        for i, ((x, y), v) in enumerate(zip(mesh.nodes, np.asarray(u_h))):
            fh.write(f"{i},{x:.15e},{y:.15e},{v:.15e}\n")
