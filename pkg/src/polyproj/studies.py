"""Experiment harness: patch tests, convergence studies, gradient-error tables.

Each study runs the reference mesh family over a range of levels, records
(level, h, relative L2 error, relative energy error), and fits asymptotic
rates by log-log least squares over the last three rows.  Reports serialize
to CSV deterministically: identical inputs reproduce byte-identical files.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .assembly import (ExactSolution, apply_dirichlet, assemble, error_norms,
                       load_vector, solve)
from .geometry import Polygon, add_midside_nodes, build_reference_mesh, polygon_registry
from .projection import DiffusionTensor
from .quadrature import SCHEMES, gradient_integration_error, rule_on_polygon

DEFAULT_LEVELS = (1, 2, 3, 4, 5)
GRAD_ERROR_ORDERS = (1, 2, 4, 8, 16, 32)


def _sci(x):
    return f"{x:.15e}"


@dataclass
class StudyRow:
    level: int
    h: float
    eps0: float
    eps1: float


@dataclass
class StudyReport:
    rows: list
    rate_l2: float
    rate_h1: float
    config: dict

    def csv(self) -> str:
        lines = ["level,h,eps0,eps1"]
        for r in self.rows:
            lines.append(f"{r.level},{_sci(r.h)},{_sci(r.eps0)},{_sci(r.eps1)}")
        lines.append(f"# rates: l2={_sci(self.rate_l2)}, h1={_sci(self.rate_h1)}")
        cfg = ", ".join(f"{k}={v}" for k, v in sorted(self.config.items()))
        lines.append(f"# config: {cfg}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.csv())


@dataclass
class GradErrorTable:
    polygon: str
    schemes: tuple
    orders: tuple
    values: np.ndarray  # (n_schemes, n_orders)

    def csv(self) -> str:
        header = "scheme," + ",".join(f"order_{k}" for k in self.orders)
        lines = [header]
        for name, row in zip(self.schemes, self.values):
            lines.append(name + "," + ",".join(_sci(v) for v in row))
        lines.append(f"# polygon: {self.polygon}")
        return "\n".join(lines) + "\n"

    def write_csv(self, path):
        with open(path, "w") as fh:
            fh.write(self.csv())


def fit_rates(rows) -> tuple[float, float]:
    """Log-log least-squares slopes of (eps0, eps1) vs h over the last 3 rows."""
    if len(rows) < 2:
        raise ValueError("need at least two rows to fit a rate")
    tail = rows[-min(3, len(rows)):]
    h = np.log([r.h for r in tail])
    r0 = np.polyfit(h, np.log([max(r.eps0, 1e-300) for r in tail]), 1)[0]
    r1 = np.polyfit(h, np.log([max(r.eps1, 1e-300) for r in tail]), 1)[0]
    return float(r0), float(r1)


# ---------------------------------------------------------------------------
# manufactured solutions


def linear_patch_solution() -> ExactSolution:
    """u = 2 x1 - x2 + 4 with the identity tensor; the source vanishes."""
    return ExactSolution(
        name="patch-linear",
        u=lambda p: 2.0 * p[:, 0] - p[:, 1] + 4.0,
        grad=lambda p: np.broadcast_to(np.array([2.0, -1.0]), (p.shape[0], 2)).copy(),
        source=lambda p: np.zeros(p.shape[0]),
        tensor=DiffusionTensor.identity(),
    )


def quadratic_patch_solution() -> ExactSolution:
    """u = x1^2 - 3 x1 x2 - x2^2 + 5 x1; harmonic, so the source vanishes."""
    return ExactSolution(
        name="patch-quadratic",
        u=lambda p: p[:, 0] ** 2 - 3.0 * p[:, 0] * p[:, 1] - p[:, 1] ** 2 + 5.0 * p[:, 0],
        grad=lambda p: np.column_stack([2.0 * p[:, 0] - 3.0 * p[:, 1] + 5.0,
                                        -3.0 * p[:, 0] - 2.0 * p[:, 1]]),
        source=lambda p: np.zeros(p.shape[0]),
        tensor=DiffusionTensor.identity(),
    )


def smooth_solution() -> ExactSolution:
    """u = sin(x1) exp(x2); harmonic, identity tensor."""
    return ExactSolution(
        name="smooth1",
        u=lambda p: np.sin(p[:, 0]) * np.exp(p[:, 1]),
        grad=lambda p: np.column_stack([np.cos(p[:, 0]) * np.exp(p[:, 1]),
                                        np.sin(p[:, 0]) * np.exp(p[:, 1])]),
        source=lambda p: np.zeros(p.shape[0]),
        tensor=DiffusionTensor.identity(),
    )


def _vark_tensor_values(p):
    x1, x2 = p[:, 0], p[:, 1]
    out = np.empty((p.shape[0], 2, 2))
    out[:, 0, 0] = (x1 + 1.0) ** 2 + x2**2
    out[:, 0, 1] = out[:, 1, 0] = -x1 * x2
    out[:, 1, 1] = (x1 + 1.0) ** 2
    return out


def _vark_source(p):
    # f = -div(K grad u), expanded with the chain rule; audited by the
    # finite-difference residual check in the tests.
    pi = np.pi
    x1, x2 = p[:, 0], p[:, 1]
    s1, c1 = np.sin(2 * pi * x1 * x2), np.cos(2 * pi * x1 * x2)
    s2, c2 = np.sin(2 * pi * x2), np.cos(2 * pi * x2)
    ux = 3 * x1**2 * x2**2 + s2 * (s1 + 2 * pi * x1 * x2 * c1)
    uy = 2 * x1**3 * x2 + 2 * pi * x1 * (x1 * c1 * s2 + s1 * c2)
    uxx = 6 * x1 * x2**2 + s2 * (4 * pi * x2 * c1 - 4 * pi**2 * x1 * x2**2 * s1)
    uxy = (6 * x1**2 * x2 + 2 * pi * c2 * (s1 + 2 * pi * x1 * x2 * c1)
           + s2 * (4 * pi * x1 * c1 - 4 * pi**2 * x1**2 * x2 * s1))
    uyy = 2 * x1**3 + 4 * pi**2 * x1 * (2 * x1 * c1 * c2 - (x1**2 + 1) * s1 * s2)
    k11 = (x1 + 1.0) ** 2 + x2**2
    k12 = -x1 * x2
    k22 = (x1 + 1.0) ** 2
    return -(2 * (x1 + 1.0) * ux - x2 * uy - x1 * ux
             + k11 * uxx + 2 * k12 * uxy + k22 * uyy)


def variable_coefficient_solution() -> ExactSolution:
    """u = x1^3 x2^2 + x1 sin(2 pi x1 x2) sin(2 pi x2) with a varying tensor."""
    pi = np.pi

    def grad(p):
        x1, x2 = p[:, 0], p[:, 1]
        s1, c1 = np.sin(2 * pi * x1 * x2), np.cos(2 * pi * x1 * x2)
        s2, c2 = np.sin(2 * pi * x2), np.cos(2 * pi * x2)
        return np.column_stack([
            3 * x1**2 * x2**2 + s2 * (s1 + 2 * pi * x1 * x2 * c1),
            2 * x1**3 * x2 + 2 * pi * x1 * (x1 * c1 * s2 + s1 * c2)])

    return ExactSolution(
        name="varK",
        u=lambda p: (p[:, 0] ** 3 * p[:, 1] ** 2
                     + p[:, 0] * np.sin(2 * pi * p[:, 0] * p[:, 1]) * np.sin(2 * pi * p[:, 1])),
        grad=grad,
        source=_vark_source,
        tensor=DiffusionTensor.from_function(_vark_tensor_values, name="varK"),
    )


PROBLEMS = {
    "smooth1": smooth_solution,
    "varK": variable_coefficient_solution,
}


# ---------------------------------------------------------------------------
# studies


def _solve_on_level(level, m, mode, scheme, order, exact: ExactSolution):
    mesh = build_reference_mesh(level)
    if m == 2:
        mesh = add_midside_nodes(mesh)
    system = assemble(mesh, m, mode, scheme, order, exact.tensor)
    system.b = load_vector(mesh, m, exact.source, scheme, order)
    reduced = apply_dirichlet(system, exact.u)
    u_h = solve(reduced)
    return mesh, u_h


def _run_study(exact, m, mode, scheme, order, levels, config) -> StudyReport:
    rows = []
    for level in levels:
        mesh, u_h = _solve_on_level(level, m, mode, scheme, order, exact)
        eps0, eps1 = error_norms(mesh, m, u_h, exact)
        rows.append(StudyRow(level=level, h=mesh.h, eps0=eps0, eps1=eps1))
    r0, r1 = fit_rates(rows) if len(rows) >= 2 else (float("nan"), float("nan"))
    return StudyReport(rows=rows, rate_l2=r0, rate_h1=r1, config=config)


def run_patch_test(m: int, mode: str, scheme: str, order: int,
                   levels=DEFAULT_LEVELS) -> StudyReport:
    """Patch test of the element order: linear field for m=1, quadratic for m=2.

    Both fields have vanishing source, so the load vector (assembled with the
    same rule as the bilinear form) is identically zero.
    """
    exact = linear_patch_solution() if m == 1 else quadratic_patch_solution()
    config = dict(study="patch-test", problem=exact.name, m=m, mode=mode,
                  scheme=scheme, order=order)
    return _run_study(exact, m, mode, scheme, order, levels, config)


def run_convergence(problem: str, m: int, mode: str, scheme: str, order: int,
                    levels=DEFAULT_LEVELS) -> StudyReport:
    """Convergence study for one of the registered problems."""
    if problem not in PROBLEMS:
        raise ValueError(f"unknown problem {problem!r}; choose from {sorted(PROBLEMS)}")
    exact = PROBLEMS[problem]()
    config = dict(study="convergence", problem=problem, m=m, mode=mode,
                  scheme=scheme, order=order)
    return _run_study(exact, m, mode, scheme, order, levels, config)


def run_grad_error(polygon="hex", schemes=SCHEMES,
                   orders=GRAD_ERROR_ORDERS) -> GradErrorTable:
    """Basis-gradient integration-error table over schemes and orders."""
    if isinstance(polygon, Polygon):
        poly, name = polygon, "custom"
    else:
        registry = polygon_registry()
        if polygon not in registry:
            raise ValueError(f"unknown polygon {polygon!r}; choose from {sorted(registry)}")
        poly, name = registry[polygon], polygon
    values = np.array([
        [gradient_integration_error(poly, rule_on_polygon(poly, scheme, order))
         for order in orders]
        for scheme in schemes])
    return GradErrorTable(polygon=name, schemes=tuple(schemes), orders=tuple(orders),
                          values=values)
