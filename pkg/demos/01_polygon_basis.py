"""Shape functions on convex polygons.

Builds Wachspress coordinates and quadratic serendipity functions on a
pentagon, checks their defining properties numerically, and draws a contour
map of one function of each family.  Figures land in demos/output/.
"""

import pathlib

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from polyproj import (SerendipityBasis, WachspressBasis, interior_points,
                      template_polygons)

OUT = pathlib.Path(__file__).parent / "output"
OUT.mkdir(exist_ok=True)

pentagon = template_polygons()["pentagon1"]
print(f"element: {pentagon}")

# --- linear family: one function per vertex -------------------------------
wach = WachspressBasis(pentagon)
pts = interior_points(pentagon, 500)
vals = wach.values(pts)

print("\nWachspress coordinates at 500 interior points")
print(f"  partition of unity   : max |sum - 1|   = {np.abs(vals.sum(axis=1) - 1).max():.2e}")
recon = vals @ pentagon.vertices
print(f"  linear precision     : max |x_rec - x| = {np.abs(recon - pts).max():.2e}")
grads = wach.gradients(pts)
print(f"  gradients sum to zero: max |sum grad|  = {np.abs(grads.sum(axis=1)).max():.2e}")

# boundary values come from the closed-form linear edge trace
mid = 0.5 * (pentagon.vertices[0] + pentagon.vertices[1])
print(f"  trace at edge midpoint -> {np.round(wach.trace(mid), 3)}")

# --- quadratic family: vertex + edge-midpoint dofs -------------------------
ser = SerendipityBasis(pentagon)
svals = ser.values(pts)
nodes = ser.dof_points
x, y = pts[:, 0], pts[:, 1]
err = max(np.abs(svals @ (nodes[:, 0] * nodes[:, 1]) - x * y).max(),
          np.abs(svals @ (nodes[:, 0] ** 2) - x * x).max())
print("\nquadratic serendipity functions")
print(f"  dofs                 : {ser.n_dofs} (5 vertices + 5 midpoints)")
print(f"  quadratic precision  : max reproduction error = {err:.2e}")
kron = np.array([ser.trace(p) for p in nodes])
print(f"  Kronecker at nodes   : max |delta error|      = {np.abs(kron - np.eye(10)).max():.2e}")

# --- contour maps ----------------------------------------------------------
fig, axes = plt.subplots(1, 2, figsize=(10, 4.2))
for ax, basis, idx, title in [(axes[0], wach, 2, "Wachspress, vertex 2"),
                              (axes[1], ser, 7, "serendipity, midpoint dof 7")]:
    dense = interior_points(pentagon, 4000)
    z = basis.values(dense)[:, idx]
    tri = ax.tricontourf(dense[:, 0], dense[:, 1], z, levels=18, cmap="viridis")
    ring = np.vstack([pentagon.vertices, pentagon.vertices[:1]])
    ax.plot(ring[:, 0], ring[:, 1], "k-", lw=1.5)
    ax.plot(*basis.dof_points.T, "ko", ms=4)
    ax.set_title(title)
    ax.set_aspect("equal")
    fig.colorbar(tri, ax=ax, shrink=0.85)
fig.tight_layout()
fig.savefig(OUT / "01_basis_contours.png", dpi=150)
print(f"\nwrote {OUT / '01_basis_contours.png'}")
