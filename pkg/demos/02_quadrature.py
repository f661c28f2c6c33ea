"""Subdivision quadrature on polygons and the gradient-integration error.

Shows the two subdivision schemes (triangle fan vs centroid-to-midpoint
quadrilaterals), audits polynomial exactness against the divergence-theorem
oracle, and reproduces the headline effect: the shape-function gradients are
rational, so no fixed rule integrates them exactly, and the quadrilateral
scheme (denser near the edges) does better order for order.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polyproj import (monomial_integral, perturbed_hexagon, rule_on_polygon,
                      run_grad_error, subdivide_quadrangulation, subdivide_triangulation)
from polyproj.quadrature import QUADRANGULATION, SCHEMES, TRIANGULATION

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

hexagon = perturbed_hexagon()

# --- point layouts ----------------------------------------------------------
fig, axes = plt.subplots(1, 2, figsize=(9, 4.2))
for ax, scheme, cutter in [(axes[0], TRIANGULATION, subdivide_triangulation),
                           (axes[1], QUADRANGULATION, subdivide_quadrangulation)]:
    rule = rule_on_polygon(hexagon, scheme, 2)
    for sub in cutter(hexagon):
        ring = np.vstack([sub, sub[:1]])
        ax.plot(ring[:, 0], ring[:, 1], color="0.7", lw=0.8)
    ring = np.vstack([hexagon.vertices, hexagon.vertices[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "k-", lw=1.5)
    ax.plot(rule.points[:, 0], rule.points[:, 1], "r.", ms=6)
    ax.set_title(f"{scheme}, order 2 ({rule.n_points} points)")
    ax.set_aspect("equal")
fig.tight_layout()
fig.savefig(OUT / "02_point_layouts.png", dpi=150)
print(f"wrote {OUT / '02_point_layouts.png'}")

# --- polynomial exactness audit ----------------------------------------------
print("\npolynomial exactness on the hexagon (relative error vs boundary oracle)")
shifted = perturbed_hexagon()
for scheme in SCHEMES:
    for order in (1, 2, 4):
        rule = rule_on_polygon(hexagon, scheme, order)
        worst = 0.0
        for a in range(order + 1):
            for b in range(order + 1 - a):
                exact = monomial_integral(hexagon, a, b)
                got = float(rule.weights @ (rule.points[:, 0] ** a * rule.points[:, 1] ** b))
                if abs(exact) > 1e-3:
                    worst = max(worst, abs(got - exact) / abs(exact))
        print(f"  {scheme:15s} order {order}: {worst:.2e}")

# --- gradient integration error ------------------------------------------------
print("\nworst-case gradient integration error (rational integrands)")
table = run_grad_error("hex")
header = "".join(f"{k:>12d}" for k in table.orders)
print(f"  {'order':15s}{header}")
for name, row in zip(table.schemes, table.values):
    print(f"  {name:15s}" + "".join(f"{v:12.3e}" for v in row))
table.write_csv(OUT / "02_grad_error.csv")
print(f"wrote {OUT / '02_grad_error.csv'}")

fig, ax = plt.subplots(figsize=(5.5, 4))
for name, row in zip(table.schemes, table.values):
    ax.loglog(table.orders, row, "o-", label=name)
ax.set_xlabel("subdomain degree of exactness")
ax.set_ylabel("max gradient integration error")
ax.grid(True, which="both", alpha=0.3)
ax.legend()
fig.tight_layout()
fig.savefig(OUT / "02_grad_error.png", dpi=150)
print(f"wrote {OUT / '02_grad_error.png'}")
