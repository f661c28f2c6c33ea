"""Polygonal finite elements with projection-consistent quadrature.

A 2D library for the scalar diffusion problem on meshes of convex polygons:
Wachspress and quadratic serendipity shape functions, subdivision quadrature
(triangulation / quadrangulation), a polynomial-projection splitting of the
element bilinear form that restores patch-test consistency under fixed
low-order rules, and a study harness for patch tests, convergence rates, and
gradient-integration error tables.
"""

from . import errors
from .assembly import (ExactSolution, GlobalSystem, ReducedSystem, apply_dirichlet,
                       assemble, error_norms, load_vector, nodal_interpolant, solve,
                       solution_to_csv)
from .basis import (SerendipityBasis, WachspressBasis, element_basis, interior_points,
                    locate_on_boundary)
from .geometry import (Polygon, PolygonalMesh, add_midside_nodes, build_reference_mesh,
                       cell_polygons, mesh_validate, perturbed_hexagon, polygon_measures,
                       polygon_registry, polygon_validate, read_mesh_text,
                       read_polygon_text, regular_polygon, template_polygons,
                       unit_square, write_mesh_text)
from .projection import (DiffusionTensor, ElementMatrices, PolynomialBasis,
                         element_stiffness, evaluate_projection, identity_tensor,
                         matrix_N, matrix_R, polynomial_basis, project_nodal,
                         projection_gradient, projector, stability_bounds,
                         stiffness_corrected, stiffness_projected, stiffness_quadrature)
from .quadrature import (QUADRANGULATION, SCHEMES, TRIANGULATION, QuadratureRule,
                         exact_gradient_integrals, gradient_integration_error, integrate,
                         monomial_integral, rule_on_polygon, subdivide_quadrangulation,
                         subdivide_triangulation)
from .studies import (DEFAULT_LEVELS, GRAD_ERROR_ORDERS, PROBLEMS, GradErrorTable,
                      StudyReport, StudyRow, fit_rates, linear_patch_solution,
                      quadratic_patch_solution, run_convergence, run_grad_error,
                      run_patch_test, smooth_solution, variable_coefficient_solution)

__version__ = "0.1.0"
