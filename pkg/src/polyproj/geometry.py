"""Convex polygon primitives, conforming polygonal meshes, and the
structured quad/pentagon reference-mesh family used by the experiments.

All objects are immutable after construction; every function here is pure,
so values can be shared freely across threads.
"""

from __future__ import annotations

import numpy as np

from .errors import DuplicateVertex, NotCCW, NotStrictlyConvex

# Node-merge tolerance for mesh generation/validation, in unit-square coordinates.
MERGE_TOL = 1e-10


class Polygon:
    """A strictly convex polygon with counter-clockwise vertices.

    Construction validates the invariants (>= 3 vertices, CCW orientation,
    strict convexity, no duplicate vertices) and raises :class:`NotCCW`,
    :class:`NotStrictlyConvex` or :class:`DuplicateVertex` on the first
    violation found.
    """

    def __init__(self, vertices):
        v = np.asarray(vertices, dtype=float)
        if v.ndim != 2 or v.shape[1] != 2 or v.shape[0] < 3:
            raise ValueError(f"expected an (n, 2) array with n >= 3, got shape {v.shape}")
        self.vertices = v
        self.vertices.setflags(write=False)
        self.n = v.shape[0]

        d2 = np.sum((v[:, None, :] - v[None, :, :]) ** 2, axis=-1)
        self.diameter = float(np.sqrt(d2.max()))
        dup = d2 + np.diag(np.full(self.n, np.inf))
        if dup.min() <= (1e-12 * self.diameter) ** 2:
            i, j = np.unravel_index(np.argmin(dup), dup.shape)
            raise DuplicateVertex(int(max(i, j)))

        nxt = np.roll(v, -1, axis=0)
        signed2 = float(np.sum(v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]))
        if signed2 <= 0.0:
            raise NotCCW(0.5 * signed2)
        self.area = 0.5 * signed2

        edges = nxt - v
        cross = edges[:, 0] * np.roll(edges[:, 1], -1) - edges[:, 1] * np.roll(edges[:, 0], -1)
        # cross[i] is taken at vertex i+1 (triple i, i+1, i+2)
        bad = np.nonzero(cross <= 1e-12 * self.diameter**2)[0]
        if bad.size:
            raise NotStrictlyConvex(int((bad[0] + 1) % self.n), float(cross[bad[0]]))

        self.edges = edges
        self.edges.setflags(write=False)
        self.edge_lengths = np.linalg.norm(edges, axis=1)
        # outward normal scaled by edge length: rotate the CCW edge by -90 deg
        self.scaled_normals = np.column_stack([edges[:, 1], -edges[:, 0]])
        self.scaled_normals.setflags(write=False)
        self.vertex_mean = v.mean(axis=0)
        cr = v[:, 0] * nxt[:, 1] - nxt[:, 0] * v[:, 1]
        self.centroid = ((v + nxt) * cr[:, None]).sum(axis=0) / (3.0 * signed2)
        self.edge_midpoints = 0.5 * (v + nxt)
        self.edge_midpoints.setflags(write=False)

    def edge_distances(self, pts):
        """Signed distance from each point to each edge line (positive inside).

        Returns an (npts, n) array for pts of shape (npts, 2).
        """
        pts = np.atleast_2d(np.asarray(pts, dtype=float))
        rel = pts[:, None, :] - self.vertices[None, :, :]
        cross = self.edges[None, :, 0] * rel[:, :, 1] - self.edges[None, :, 1] * rel[:, :, 0]
        return cross / self.edge_lengths[None, :]

    def contains(self, pts, margin=0.0):
        """True where all edge distances exceed ``margin`` (absolute units)."""
        return (self.edge_distances(pts) > margin).all(axis=1)

    def __repr__(self):
        return f"Polygon(n={self.n}, area={self.area:.6g}, diameter={self.diameter:.6g})"


def polygon_validate(vertices) -> Polygon:
    """Validate raw vertices, returning a Polygon or raising a diagnostic error."""
    return Polygon(vertices)


def polygon_measures(p: Polygon) -> dict:
    """Shoelace area, vertex mean, area centroid, and max pairwise diameter."""
    return {
        "area": p.area,
        "vertex_mean": p.vertex_mean.copy(),
        "centroid": p.centroid.copy(),
        "diameter": p.diameter,
    }


# ---------------------------------------------------------------------------
# meshes


class PolygonalMesh:
    """Conforming mesh of convex polygons.

    Parameters
    ----------
    nodes : (N, 2) array of node coordinates.
    elements : sequence of CCW node-index lists (vertices only).
    midside : optional dict mapping a sorted vertex pair (a, b) to the node
        index of the edge midpoint; present only after
        :func:`add_midside_nodes`.

    Edge incidence, boundary detection and per-element degree-of-freedom
    lists are derived on construction.  For meshes with midside data the dof
    list of an n-gon is ``[v_1..v_n, mid(e_1)..mid(e_n)]`` (dimension 2n).
    """

    def __init__(self, nodes, elements, midside=None):
        self.nodes = np.asarray(nodes, dtype=float)
        self.nodes.setflags(write=False)
        self.elements = [np.asarray(e, dtype=int) for e in elements]
        self.midside = dict(midside) if midside else None

        edges: dict[tuple[int, int], list[tuple[int, int]]] = {}
        for ei, elem in enumerate(self.elements):
            for a, b in zip(elem, np.roll(elem, -1)):
                key = (min(a, b), max(a, b))
                orient = 1 if a < b else -1
                edges.setdefault(key, []).append((ei, orient))
        self.edges = edges

        boundary = set()
        for (a, b), inc in edges.items():
            if len(inc) == 1:
                boundary.add(int(a))
                boundary.add(int(b))
                if self.midside is not None:
                    boundary.add(int(self.midside[(a, b)]))
        self.boundary_nodes = frozenset(boundary)

    @property
    def n_nodes(self):
        return self.nodes.shape[0]

    @property
    def n_elements(self):
        return len(self.elements)

    def element_polygon(self, e) -> Polygon:
        return Polygon(self.nodes[self.elements[e]])

    def element_dofs(self, e):
        """Global dof indices of element e (vertices, then edge midpoints)."""
        elem = self.elements[e]
        if self.midside is None:
            return elem
        mids = [self.midside[(min(a, b), max(a, b))]
                for a, b in zip(elem, np.roll(elem, -1))]
        return np.concatenate([elem, np.asarray(mids, dtype=int)])

    @property
    def h(self):
        """Mesh size: maximum element diameter."""
        return max(self.element_polygon(e).diameter for e in range(self.n_elements))

    def boundary_edge_keys(self):
        return [k for k, inc in self.edges.items() if len(inc) == 1]


def mesh_validate(mesh: PolygonalMesh) -> list[str]:
    """Check all mesh invariants; returns the list of violations (never raises)."""
    issues = []

    polys = {}
    for e in range(mesh.n_elements):
        try:
            polys[e] = mesh.element_polygon(e)
        except (NotCCW, NotStrictlyConvex, DuplicateVertex, ValueError) as err:
            issues.append(f"InvalidElement({e}): {type(err).__name__}: {err}")

    for (a, b), inc in mesh.edges.items():
        if len(inc) == 1:
            continue
        if len(inc) > 2:
            issues.append(f"NonConformingEdge({a},{b}): shared by {len(inc)} elements")
        elif inc[0][1] == inc[1][1]:
            issues.append(f"NonConformingEdge({a},{b}): traversed twice in the same direction "
                          f"by elements {inc[0][0]} and {inc[1][0]}")

    # duplicate nodes within the merge tolerance: sweep along x, window scan
    order = np.lexsort((mesh.nodes[:, 1], mesh.nodes[:, 0]))
    pts = mesh.nodes[order]
    for i in range(len(pts)):
        j = i + 1
        while j < len(pts) and pts[j, 0] - pts[i, 0] <= MERGE_TOL:
            if abs(pts[j, 1] - pts[i, 1]) <= MERGE_TOL:
                a, b = sorted((int(order[i]), int(order[j])))
                issues.append(f"DuplicateNode({a},{b})")
            j += 1

    # element areas must tile the region enclosed by the boundary loop
    if polys and len(polys) == mesh.n_elements and not issues:
        total = sum(p.area for p in polys.values())
        enclosed = 0.0
        for (a, b), inc in mesh.edges.items():
            if len(inc) != 1:
                continue
            p, q = (mesh.nodes[a], mesh.nodes[b]) if inc[0][1] == 1 else (mesh.nodes[b], mesh.nodes[a])
            enclosed += 0.5 * (p[0] * q[1] - q[0] * p[1])
        if abs(total - enclosed) > 1e-12 * max(abs(enclosed), 1.0):
            issues.append(f"AreaMismatch: elements sum to {total!r}, boundary encloses {enclosed!r}")

    return issues


def add_midside_nodes(mesh: PolygonalMesh) -> PolygonalMesh:
    """Insert one node at each unique edge midpoint (quadratic dof layout)."""
    keys = sorted(mesh.edges.keys())
    mids = np.array([0.5 * (mesh.nodes[a] + mesh.nodes[b]) for a, b in keys])
    midside = {k: mesh.n_nodes + i for i, k in enumerate(keys)}
    nodes = np.vstack([mesh.nodes, mids])
    return PolygonalMesh(nodes, mesh.elements, midside=midside)


# ---------------------------------------------------------------------------
# reference mesh family

# Unit cell: two quadrilaterals and two pentagons tiling [0,1]^2.  Shared
# cell-boundary nodes sit at corners and edge midpoints so translated copies
# conform.  Interior nodes are placed asymmetrically to keep every element
# strictly convex.
_CELL_NODES = np.array([
    [0.0, 0.0], [0.5, 0.0], [1.0, 0.0], [1.0, 0.5],
    [1.0, 1.0], [0.5, 1.0], [0.0, 1.0], [0.0, 0.5],
    [0.55, 0.3], [0.45, 0.7],
])
_CELL_ELEMENTS = [
    [0, 1, 8, 9, 7],     # pentagon, south-west
    [7, 9, 5, 6],        # quadrilateral, north-west
    [1, 2, 3, 8],        # quadrilateral, south-east
    [8, 3, 4, 5, 9],     # pentagon, north-east
]


def build_reference_mesh(level: int) -> PolygonalMesh:
    """Tile the unit square with 2^(level-1) x 2^(level-1) copies of the cell.

    Element count is 4^level; the mesh size halves exactly with each level.
    """
    if level < 1:
        raise ValueError(f"level must be >= 1, got {level}")
    cells = 2 ** (level - 1)
    scale = 1.0 / cells

    index: dict[tuple[int, int], int] = {}
    nodes: list[np.ndarray] = []
    elements = []
    for j in range(cells):
        for i in range(cells):
            local = (_CELL_NODES + np.array([i, j])) * scale
            ids = []
            for p in local:
                key = (round(p[0] / MERGE_TOL), round(p[1] / MERGE_TOL))
                if key not in index:
                    index[key] = len(nodes)
                    nodes.append(p)
                ids.append(index[key])
            for elem in _CELL_ELEMENTS:
                elements.append([ids[k] for k in elem])
    return PolygonalMesh(np.array(nodes), elements)


# ---------------------------------------------------------------------------
# polygon registry (single-element shapes used by tests and the CLI)


def unit_square() -> Polygon:
    return Polygon([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]])


def regular_polygon(n, radius=1.0, center=(0.0, 0.0)) -> Polygon:
    ang = 2.0 * np.pi * np.arange(n) / n
    return Polygon(np.column_stack([center[0] + radius * np.cos(ang),
                                    center[1] + radius * np.sin(ang)]))


def perturbed_hexagon() -> Polygon:
    """Regular hexagon (circumradius 1) with its first vertex rotated by +5 deg."""
    ang = 2.0 * np.pi * np.arange(6) / 6
    ang[0] += np.deg2rad(5.0)
    return Polygon(np.column_stack([np.cos(ang), np.sin(ang)]))


def cell_polygons() -> dict[str, Polygon]:
    """The four reference-cell element shapes, by name."""
    names = ["pentagon1", "quad1", "quad2", "pentagon2"]
    return {name: Polygon(_CELL_NODES[idx]) for name, idx in zip(names, _CELL_ELEMENTS)}


def polygon_registry() -> dict[str, Polygon]:
    reg = {"hex": perturbed_hexagon(), "square": unit_square()}
    reg.update(cell_polygons())
    return reg


def template_polygons() -> dict[str, Polygon]:
    """Square, both cell quads, both cell pentagons, and the registry hexagon."""
    return polygon_registry()


# ---------------------------------------------------------------------------
# mesh text format


def write_mesh_text(mesh: PolygonalMesh, path):
    """Write vertex geometry/connectivity in the plain text exchange format."""
    with open(path, "w") as fh:
        fh.write(f"NODES {mesh.n_nodes}\n")
        for x, y in mesh.nodes:
            fh.write(f"{x:.17g} {y:.17g}\n")
        fh.write(f"ELEMENTS {mesh.n_elements}\n")
        for elem in mesh.elements:
            fh.write(" ".join([str(len(elem))] + [str(int(i)) for i in elem]) + "\n")


def read_mesh_text(path) -> PolygonalMesh:
    """Read the plain text exchange format written by :func:`write_mesh_text`."""
    with open(path) as fh:
        tokens = fh.read().split()
    pos = 0

    def take():
        nonlocal pos
        tok = tokens[pos]
        pos += 1
        return tok

    if take() != "NODES":
        raise ValueError("expected NODES header")
    n = int(take())
    nodes = np.array([[float(take()), float(take())] for _ in range(n)])
    if take() != "ELEMENTS":
        raise ValueError("expected ELEMENTS header")
    m = int(take())
    elements = []
    for _ in range(m):
        k = int(take())
        elements.append([int(take()) for _ in range(k)])
    return PolygonalMesh(nodes, elements)


def read_polygon_text(path) -> Polygon:
    """Read a single polygon: one 'x y' pair per line, CCW."""
    data = np.loadtxt(path, dtype=float, ndmin=2)
    return Polygon(data)
