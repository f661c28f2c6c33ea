import numpy as np
import pytest

from polyproj import (DiffusionTensor, element_basis,
                      exact_gradient_integrals, interior_points, matrix_N, matrix_R,
                      polynomial_basis, project_nodal, projection_gradient, projector,
                      evaluate_projection, rule_on_polygon, stability_bounds,
                      stiffness_corrected, stiffness_projected, stiffness_quadrature,
                      unit_square)
from polyproj.errors import InsufficientQuadrature, NonSPD, SingularGram
from polyproj.quadrature import QUADRANGULATION, TRIANGULATION

from conftest import TEMPLATE_NAMES

I2 = np.eye(2)
K_ANISO = np.array([[2.0, 0.3], [0.3, 1.0]])


def vark_tensor_values(pts):
    x1, x2 = pts[:, 0], pts[:, 1]
    out = np.empty((len(pts), 2, 2))
    out[:, 0, 0] = (x1 + 1.0) ** 2 + x2**2
    out[:, 0, 1] = out[:, 1, 0] = -x1 * x2
    out[:, 1, 1] = (x1 + 1.0) ** 2
    return out


def random_polynomial(poly_basis, rng):
    """Random degree-m polynomial as (callable, nodal values)."""
    coeffs = rng.standard_normal(poly_basis.n_terms)
    const = rng.standard_normal()

    def p(pts):
        return const + poly_basis.values(pts) @ coeffs

    return p, p(poly_basis.dof_points)


class TestPolynomialBasis:
    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("m", [1, 2])
    def test_nodal_means_vanish(self, templates, name, m):
        basis = element_basis(templates[name], m)
        pb = polynomial_basis(basis)
        nodal = pb.values(basis.dof_points)
        assert np.abs(nodal.mean(axis=0)).max() < 1e-13

    @pytest.mark.parametrize("m", [1, 2])
    def test_spans_full_degree(self, templates, m):
        basis = element_basis(templates["pentagon1"], m)
        pb = polynomial_basis(basis)
        vander = np.column_stack([np.ones(basis.n_dofs), pb.values(basis.dof_points)])
        assert np.linalg.matrix_rank(vander) == pb.n_terms + 1

    def test_gradients_and_hessians(self, templates, rng):
        pb = polynomial_basis(element_basis(templates["hex"], 2))
        pts = interior_points(templates["hex"], 10)
        step = 1e-6
        for d, e in enumerate(np.eye(2)):
            fd = (pb.values(pts + step * e) - pb.values(pts - step * e)) / (2 * step)
            assert np.abs(pb.gradients(pts)[:, :, d] - fd).max() < 1e-9
        div = pb.div_flux_constants(K_ANISO)
        h = pb.hessians()
        assert div == pytest.approx(np.einsum("ab,tab->t", K_ANISO, h))


class TestMatrixN:
    def test_square_linear_column(self):
        basis = element_basis(unit_square(), 1)
        pb = polynomial_basis(basis)
        N = matrix_N(basis, pb)
        d = unit_square().diameter
        assert N[:, 0] * d == pytest.approx(np.array([-0.5, 0.5, 0.5, -0.5]), abs=1e-15)
        assert np.abs(N.mean(axis=0)).max() < 1e-15

    def test_square_quadratic_shape_and_rank(self):
        basis = element_basis(unit_square(), 2)
        N = matrix_N(basis, polynomial_basis(basis))
        assert N.shape == (8, 5)
        assert np.linalg.matrix_rank(N) == 5


class TestMatrixR:
    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    def test_linear_matches_high_order_quadrature(self, templates, name):
        # independent oracle: R_ia = a^E(p_a, phi_i) evaluated with an
        # order-32 rule on the rational integrands
        poly = templates[name]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        R = matrix_R(basis, pb, K_ANISO, rule_on_polygon(poly, QUADRANGULATION, 1))
        ref_rule = rule_on_polygon(poly, QUADRANGULATION, 32)
        grads = basis.gradients(ref_rule.points)
        pgrads = pb.gradients(ref_rule.points)
        oracle = np.einsum("q,qid,de,qte->it", ref_rule.weights, grads, K_ANISO, pgrads)
        assert np.abs(R - oracle).max() < 1e-10

    def test_square_closed_form_edge_integration(self):
        basis = element_basis(unit_square(), 1)
        pb = polynomial_basis(basis)
        R = matrix_R(basis, pb, I2, rule_on_polygon(unit_square(), QUADRANGULATION, 1))
        d = unit_square().diameter
        # hand edge integration: R[:, 0] = (boundary integral of phi_i n_1)/d
        assert R[:, 0] * d == pytest.approx(np.array([-0.5, 0.5, 0.5, -0.5]), abs=1e-14)
        assert R[:, 1] * d == pytest.approx(np.array([-0.5, -0.5, 0.5, 0.5]), abs=1e-14)

    def test_linear_in_tensor(self, templates):
        poly = templates["pentagon2"]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(poly, TRIANGULATION, 1)
        R1 = matrix_R(basis, pb, K_ANISO, rule)
        R2 = matrix_R(basis, pb, 2.0 * K_ANISO, rule)
        assert np.abs(R2 - 2.0 * R1).max() < 1e-14

    def test_quadratic_needs_degree_two_rule(self, templates):
        poly = templates["quad1"]
        basis = element_basis(poly, 2)
        pb = polynomial_basis(basis)
        with pytest.raises(InsufficientQuadrature):
            matrix_R(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 1))


class TestProjector:
    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("m", [1, 2])
    def test_reproduces_polynomials(self, templates, name, m, rng):
        poly = templates[name]
        basis = element_basis(poly, m)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(poly, QUADRANGULATION, 2)
        data = stiffness_projected(basis, pb, K_ANISO, rule)
        pts = interior_points(poly, 20)
        for _ in range(3):
            p, nodal = random_polynomial(pb, rng)
            const, coeffs = project_nodal(pb, data.S, nodal)
            assert np.abs(evaluate_projection(pb, const, coeffs, pts) - p(pts)).max() < 1e-10

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    def test_linear_gradient_boundary_formula(self, templates, name, rng):
        # the projected gradient is the boundary average of the nodal trace
        poly = templates[name]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, TRIANGULATION, 1))
        v = rng.standard_normal(poly.n)
        const, coeffs = project_nodal(pb, data.S, v)
        grad = projection_gradient(pb, coeffs, poly.vertex_mean[None, :])[0]
        boundary = exact_gradient_integrals(poly).T @ v / poly.area
        assert np.abs(grad - boundary).max() < 1e-12
        assert const == pytest.approx(v.mean(), abs=1e-14)

    def test_least_squares_optimality(self, templates, rng):
        # perturbing the projected constant gradient never lowers the
        # energy distance measured with a near-exact rule
        poly = templates["pentagon1"]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 1))
        rule = rule_on_polygon(poly, QUADRANGULATION, 32)
        grads = basis.gradients(rule.points)

        def energy(q, v):
            diff = np.einsum("qid,i->qd", grads, v) - q[None, :]
            return float(rule.weights @ (diff * diff).sum(axis=1))

        for _ in range(20):
            v = rng.standard_normal(poly.n)
            _, coeffs = project_nodal(pb, data.S, v)
            q_star = projection_gradient(pb, coeffs, poly.vertex_mean[None, :])[0]
            base = energy(q_star, v)
            direction = rng.standard_normal(2)
            direction /= np.linalg.norm(direction)
            assert energy(q_star + 1e-3 * direction, v) >= base
            assert energy(q_star - 1e-3 * direction, v) >= base

    def test_singular_gram_raises(self):
        basis = element_basis(unit_square(), 1)
        pb = polynomial_basis(basis)
        N = matrix_N(basis, pb)
        with pytest.raises(SingularGram):
            projector(N, np.zeros_like(N))


class TestQuadratureStiffness:
    def test_square_classical_bilinear(self):
        basis = element_basis(unit_square(), 1)
        K = stiffness_quadrature(basis, I2, rule_on_polygon(unit_square(), QUADRANGULATION, 2))
        classic = np.array([[2, -0.5, -1, -0.5], [-0.5, 2, -0.5, -1],
                            [-1, -0.5, 2, -0.5], [-0.5, -1, -0.5, 2]]) / 3.0
        assert np.abs(K - classic).max() < 1e-13

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    def test_row_sums_vanish(self, templates, name):
        basis = element_basis(templates[name], 1)
        K = stiffness_quadrature(basis, I2, rule_on_polygon(templates[name], TRIANGULATION, 2))
        assert np.abs(K.sum(axis=1)).max() < 1e-12

    def test_hexagon_rules_disagree(self, templates):
        # rational gradients are never integrated exactly: different orders
        # give measurably different matrices
        basis = element_basis(templates["hex"], 1)
        k8 = stiffness_quadrature(basis, I2, rule_on_polygon(templates["hex"], QUADRANGULATION, 8))
        k32 = stiffness_quadrature(basis, I2, rule_on_polygon(templates["hex"], QUADRANGULATION, 32))
        assert np.abs(k8 - k32).max() > 1e-9


class TestProjectedStiffness:
    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("order", [1, 2, 4, 8])
    def test_linear_patch_identity_any_order(self, templates, name, order):
        poly = templates[name]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, K_ANISO, rule_on_polygon(poly, QUADRANGULATION, order))
        scale = np.abs(data.R).max()
        assert np.abs(data.K_elem @ data.N - data.R).max() < 1e-11 * max(scale, 1.0)

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    def test_quadratic_patch_identity_matched_rule(self, templates, name):
        poly = templates[name]
        basis = element_basis(poly, 2)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, K_ANISO, rule_on_polygon(poly, QUADRANGULATION, 2))
        scale = np.abs(data.R).max()
        assert np.abs(data.K_elem @ data.N - data.R).max() < 1e-11 * max(scale, 1.0)

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("m", [1, 2])
    def test_gram_symmetric_positive_definite(self, templates, name, m):
        poly = templates[name]
        basis = element_basis(poly, m)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 2))
        assert np.abs(data.G - data.G.T).max() <= 1e-11 * np.abs(data.G).max()
        assert np.linalg.eigvalsh(0.5 * (data.G + data.G.T)).min() > 0

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("m", [1, 2])
    def test_remainder_annihilates_polynomials(self, templates, name, m):
        poly = templates[name]
        basis = element_basis(poly, m)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 2))
        assert np.abs(data.P.T @ data.N).max() < 1e-11

    @pytest.mark.parametrize("name", TEMPLATE_NAMES)
    @pytest.mark.parametrize("m", [1, 2])
    def test_splitting_identity_high_order(self, templates, name, m):
        poly = templates[name]
        basis = element_basis(poly, m)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 32))
        gap = np.abs(data.K_elem - data.K_quad).max()
        assert gap < 1e-9 * np.abs(data.K_quad).max()

    def test_square_equivalence(self):
        basis = element_basis(unit_square(), 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(unit_square(), QUADRANGULATION, 2))
        assert np.abs(data.K_elem - data.K_quad).max() < 1e-12

    def test_hexagon_low_order_spectrum(self, templates):
        poly = templates["hex"]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 1))
        K = data.K_elem
        assert np.abs(K - K.T).max() < 1e-13
        assert np.abs(K @ np.ones(poly.n)).max() < 1e-13
        eig = np.linalg.eigvalsh(0.5 * (K + K.T))
        assert abs(eig[0]) < 1e-12          # constants in the kernel
        assert eig[1] > 1e-3                # and nothing else


class TestCorrectedStiffness:
    def test_constant_field_reduces_to_projected(self):
        basis = element_basis(unit_square(), 2)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(unit_square(), QUADRANGULATION, 2)
        const_field = DiffusionTensor.from_function(
            lambda p: np.broadcast_to(K_ANISO, (len(p), 2, 2)))
        corr = stiffness_corrected(basis, pb, const_field, rule)
        proj = stiffness_projected(basis, pb, K_ANISO, rule)
        assert np.abs(corr.K_elem - proj.K_elem).max() < 1e-13

    def test_variable_field_symmetry_and_kernel(self):
        basis = element_basis(unit_square(), 2)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(unit_square(), QUADRANGULATION, 2)
        field = DiffusionTensor.from_function(vark_tensor_values)
        corr = stiffness_corrected(basis, pb, field, rule)
        scale = np.abs(corr.K_elem).max()
        assert np.abs(corr.K_elem - corr.K_elem.T).max() < 1e-11 * scale
        assert np.abs(corr.K_elem @ np.ones(basis.n_dofs)).max() < 1e-11 * scale

    def test_correction_is_sampled_difference(self, templates):
        poly = templates["pentagon1"]
        basis = element_basis(poly, 2)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(poly, QUADRANGULATION, 2)
        field = DiffusionTensor.from_function(vark_tensor_values)
        corr = stiffness_corrected(basis, pb, field, rule)
        K_E = field.element_average(rule)
        proj = stiffness_projected(basis, pb, K_E, rule)
        k_tilde = stiffness_quadrature(basis, field, rule)
        expected = proj.K_elem + (k_tilde - proj.K_quad)
        assert np.array_equal(corr.K_elem, expected)

    def test_non_spd_average_rejected(self):
        basis = element_basis(unit_square(), 2)
        pb = polynomial_basis(basis)
        rule = rule_on_polygon(unit_square(), QUADRANGULATION, 2)
        bad = DiffusionTensor.from_function(
            lambda p: np.broadcast_to(np.diag([1.0, -1.0]), (len(p), 2, 2)))
        with pytest.raises(NonSPD):
            stiffness_corrected(basis, pb, bad, rule)


class TestStabilityBounds:
    def test_square_exact_case(self):
        basis = element_basis(unit_square(), 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(unit_square(), QUADRANGULATION, 2))
        c1, c2 = stability_bounds(data.K_elem, basis, I2)
        assert c1 == pytest.approx(1.0, abs=1e-10)
        assert c2 == pytest.approx(1.0, abs=1e-10)

    def test_pentagon_low_order_bounds(self, templates):
        poly = templates["pentagon1"]
        basis = element_basis(poly, 1)
        pb = polynomial_basis(basis)
        data = stiffness_projected(basis, pb, I2, rule_on_polygon(poly, QUADRANGULATION, 1))
        c1, c2 = stability_bounds(data.K_elem, basis, I2)
        assert 0.1 < c1 <= c2 < 10.0

    def test_scale_invariance(self, templates):
        from polyproj import Polygon

        poly = templates["pentagon1"]
        bounds = []
        for s in (1.0, 0.125):
            scaled = Polygon(np.asarray(poly.vertices) * s)
            basis = element_basis(scaled, 1)
            pb = polynomial_basis(basis)
            data = stiffness_projected(basis, pb, I2, rule_on_polygon(scaled, QUADRANGULATION, 1))
            bounds.append(stability_bounds(data.K_elem, basis, I2))
        assert bounds[0] == pytest.approx(bounds[1], abs=1e-10)


class TestDiffusionTensor:
    def test_constant_validation(self):
        with pytest.raises(ValueError):
            DiffusionTensor(constant=np.array([[1.0, 0.5], [0.0, 1.0]]))
        with pytest.raises(ValueError):
            DiffusionTensor()

    def test_spot_check(self):
        K = DiffusionTensor(constant=np.diag([2.0, 0.5]))
        pts = np.zeros((3, 2))
        assert K.spot_check(pts, alpha=2.0)
        assert not K.spot_check(pts, alpha=1.5)

    def test_element_average_of_field(self):
        field = DiffusionTensor.from_function(vark_tensor_values)
        rule = rule_on_polygon(unit_square(), QUADRANGULATION, 4)
        avg = field.element_average(rule)
        # exact integrals of the entries over the unit square
        exact = np.array([[7.0 / 3.0 + 1.0 / 3.0, -0.25], [-0.25, 7.0 / 3.0]])
        assert np.abs(avg - exact).max() < 1e-12
