"""Element stiffness via the polynomial-projection splitting.

The element bilinear form is split into a polynomial (consistency) part,
computed exactly from boundary integrals, and a remainder (stability) part
that is the only piece handed to numerical quadrature.  The result is
polynomially consistent for ANY rule order, which is exactly the property
the raw quadrature form lacks.
"""

import numpy as np

from polyproj import (element_basis, perturbed_hexagon, polynomial_basis,
                      rule_on_polygon, stability_bounds, stiffness_projected,
                      stiffness_quadrature)
from polyproj.quadrature import QUADRANGULATION

I2 = np.eye(2)
hexagon = perturbed_hexagon()
basis = element_basis(hexagon, 1)
pb = polynomial_basis(basis)

print("hexagonal element, linear shape functions, identity tensor\n")

print("polynomial consistency (K_elem @ N == R) by rule order:")
print(f"  {'order':>5s} {'raw quadrature':>16s} {'projection split':>18s}")
for order in (1, 2, 4, 8):
    rule = rule_on_polygon(hexagon, QUADRANGULATION, order)
    data = stiffness_projected(basis, pb, I2, rule)
    raw = stiffness_quadrature(basis, I2, rule)
    raw_defect = np.abs(raw @ data.N - data.R).max()
    split_defect = np.abs(data.K_elem @ data.N - data.R).max()
    print(f"  {order:5d} {raw_defect:16.3e} {split_defect:18.3e}")
print("  -> the split form is consistent to round-off at every order;")
print("     the raw form only approaches consistency as the rule refines.\n")

rule1 = rule_on_polygon(hexagon, QUADRANGULATION, 1)
data1 = stiffness_projected(basis, pb, I2, rule1)
consistency = data1.S @ data1.R.T
stability = data1.P @ data1.K_quad @ data1.P.T
print(f"with the {rule1.n_points}-point order-1 rule:")
print(f"  ||consistency part|| = {np.abs(consistency).max():.4f}")
print(f"  ||stability part||   = {np.abs(stability).max():.4f}")
eig = np.linalg.eigvalsh(0.5 * (data1.K_elem + data1.K_elem.T))
print(f"  eigenvalues: min {eig[0]:.2e} (constants), next {eig[1]:.4f} (coercive)")

c1, c2 = stability_bounds(data1.K_elem, basis, I2)
print(f"  spectral bounds vs near-exact form: c1 = {c1:.4f}, c2 = {c2:.4f}")

rule32 = rule_on_polygon(hexagon, QUADRANGULATION, 32)
data32 = stiffness_projected(basis, pb, I2, rule32)
gap = np.abs(data32.K_elem - data32.K_quad).max() / np.abs(data32.K_quad).max()
print(f"\nsplitting identity: with an order-32 rule the split and raw forms agree "
      f"to {gap:.1e} (both approximate the exact bilinear form).")
