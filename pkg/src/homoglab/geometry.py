"""Meshes for the perforated cell, the tiled perforated domain and the target rectangle.

All meshes are conforming P1 triangulations with region tags (FLUID/HOLE),
tagged boundary edges and, for tiled meshes, the lattice index of the cell
each triangle came from.  The template cell mesh places its square-boundary
nodes at exact multiples of the grid spacing so that opposite faces match
bitwise and tiling can stitch nodes by integer arithmetic alone.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError, GeometryError, MeshInternalError

# triangle region tags
FLUID = 0
HOLE = 1

# boundary edge kinds
OUTER = 0
HOLE_BDRY = 1

_NO_CELL = (-(2 ** 30), -(2 ** 30))


@dataclass
class DomainConfig:
    """Geometry of the perforated unit square and the Robin-free rectangle K."""

    eps: float
    hole_radius: float
    hole_poly: int = 32
    k_rect: tuple[float, float, float, float] = (0.25, 0.25, 0.75, 0.75)
    h_ref: float = 1.0 / 8.0

    def __post_init__(self):
        n = 1.0 / self.eps
        if abs(n - round(n)) > 1e-9 or round(n) < 2:
            raise ConfigError(f"eps must equal 1/n for integer n >= 2, got {self.eps}")
        if not (0.0 <= self.hole_radius < 0.5):
            raise ConfigError(f"hole_radius must lie in [0, 0.5), got {self.hole_radius}")
        if self.hole_poly < 8:
            raise ConfigError(f"hole_poly must be >= 8, got {self.hole_poly}")
        x0, y0, x1, y1 = self.k_rect
        if not (0.0 < x0 < x1 < 1.0 and 0.0 < y0 < y1 < 1.0):
            raise ConfigError(f"K rectangle must satisfy 0<x0<x1<1, 0<y0<y1<1, got {self.k_rect}")
        if self.hole_radius + self.h_ref >= 0.5:
            raise GeometryError(
                f"hole_radius + h_ref = {self.hole_radius + self.h_ref} >= 0.5: "
                "hole would touch the cell boundary"
            )

    @property
    def n_cells(self) -> int:
        return int(round(1.0 / self.eps))


@dataclass
class Mesh:
    """Conforming triangulation with region and boundary tags.

    nodes          (N,2) float coordinates
    triangles      (T,3) node indices, positively oriented
    tri_region     (T,)  FLUID or HOLE
    tri_cell       (T,2) lattice index of the originating cell, _NO_CELL if n/a
    boundary_edges (E,2) node index pairs
    edge_kind      (E,)  OUTER or HOLE_BDRY
    edge_cell      (E,2) lattice index for HOLE_BDRY edges, _NO_CELL otherwise
    """

    nodes: np.ndarray
    triangles: np.ndarray
    tri_region: np.ndarray
    tri_cell: np.ndarray
    boundary_edges: np.ndarray
    edge_kind: np.ndarray
    edge_cell: np.ndarray
    eps: float = 0.0
    meta: dict = field(default_factory=dict)

    # lazy caches
    _areas: np.ndarray | None = field(default=None, repr=False)
    _grads: np.ndarray | None = field(default=None, repr=False)
    _locator: object | None = field(default=None, repr=False)

    @property
    def n_nodes(self) -> int:
        return len(self.nodes)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)

    def areas(self) -> np.ndarray:
        """Signed triangle areas (validated positive at construction)."""
        if self._areas is None:
            p = self.nodes[self.triangles]
            self._areas = 0.5 * (
                (p[:, 1, 0] - p[:, 0, 0]) * (p[:, 2, 1] - p[:, 0, 1])
                - (p[:, 2, 0] - p[:, 0, 0]) * (p[:, 1, 1] - p[:, 0, 1])
            )
        return self._areas

    def grads(self) -> np.ndarray:
        """(T,3,2) gradients of the three P1 hat functions per triangle."""
        if self._grads is None:
            p = self.nodes[self.triangles]
            a = self.areas()
            g = np.empty((self.n_triangles, 3, 2))
            for loc in range(3):
                pj = p[:, (loc + 1) % 3]
                pk = p[:, (loc + 2) % 3]
                g[:, loc, 0] = (pj[:, 1] - pk[:, 1]) / (2.0 * a)
                g[:, loc, 1] = (pk[:, 0] - pj[:, 0]) / (2.0 * a)
            self._grads = g
        return self._grads

    def fluid_triangles(self) -> np.ndarray:
        return np.nonzero(self.tri_region == FLUID)[0]

    def fluid_area(self) -> float:
        return float(np.sum(self.areas()[self.tri_region == FLUID]))

    def outer_nodes(self) -> np.ndarray:
        """Sorted unique node indices lying on OUTER boundary edges."""
        e = self.boundary_edges[self.edge_kind == OUTER]
        return np.unique(e)

    def hole_boundary_nodes(self) -> np.ndarray:
        e = self.boundary_edges[self.edge_kind == HOLE_BDRY]
        return np.unique(e)


def _validate(mesh: Mesh, what: str) -> Mesh:
    a = mesh.areas()
    if len(a) and a.min() <= 0.0:
        t = int(np.argmin(a))
        raise MeshInternalError(
            f"{what}: non-positive triangle {t} with vertices "
            f"{mesh.nodes[mesh.triangles[t]].tolist()}"
        )
    return mesh


def _polygon(r: float, n_b: int) -> np.ndarray:
    ang = 2.0 * np.pi * np.arange(n_b) / n_b
    return np.column_stack([0.5 + r * np.cos(ang), 0.5 + r * np.sin(ang)])


def polygon_area(r: float, n_b: int) -> float:
    """Exact area of the regular n_b-gon inscribed in the radius-r circle."""
    if r == 0.0:
        return 0.0
    return 0.5 * n_b * r * r * np.sin(2.0 * np.pi / n_b)


def polygon_perimeter(r: float, n_b: int) -> float:
    if r == 0.0:
        return 0.0
    return 2.0 * n_b * r * np.sin(np.pi / n_b)


def _square_boundary_nodes(m: int) -> tuple[np.ndarray, np.ndarray]:
    """4m boundary nodes of the unit square, CCW from (0,0), uniform spacing 1/m.

    Coordinates are produced as k/m so the same parameter value yields the
    identical float on opposite faces.  Also returns the integer lattice keys
    (kx, ky) of each node in units of 1/m.
    """
    pts = []
    keys = []
    for k in range(m):       # bottom
        pts.append((k / m, 0.0))
        keys.append((k, 0))
    for k in range(m):       # right
        pts.append((1.0, k / m))
        keys.append((m, k))
    for k in range(m):       # top
        pts.append(((m - k) / m, 1.0))
        keys.append((m - k, m))
    for k in range(m):       # left
        pts.append((0.0, (m - k) / m))
        keys.append((0, m - k))
    return np.array(pts), np.array(keys, dtype=np.int64)


def _structured_square(m: int, offset=(0.0, 0.0), scale=1.0):
    """Structured two-triangles-per-square grid on [0,1]^2 scaled/translated."""
    ii, jj = np.meshgrid(np.arange(m + 1), np.arange(m + 1), indexing="xy")
    nodes = np.column_stack([
        offset[0] + scale * (ii.ravel() / m),
        offset[1] + scale * (jj.ravel() / m),
    ])
    tris = []
    for j in range(m):
        for i in range(m):
            a = j * (m + 1) + i
            b = a + 1
            c = a + m + 2
            d = a + m + 1
            tris.append((a, b, c))
            tris.append((a, c, d))
    tris = np.array(tris, dtype=np.int64)
    edges = []
    for i in range(m):  # bottom / top
        edges.append((i, i + 1))
        edges.append((m * (m + 1) + i, m * (m + 1) + i + 1))
    for j in range(m):  # left / right
        edges.append((j * (m + 1), (j + 1) * (m + 1)))
        edges.append((j * (m + 1) + m, (j + 1) * (m + 1) + m))
    return nodes, tris, np.array(edges, dtype=np.int64)


def build_cell_mesh(r: float, n_b: int, h_ref: float) -> Mesh:
    """Template mesh of the full unit cell Q with the hole polygon as interface.

    Triangles inside the polygon are tagged HOLE, outside FLUID; the polygon
    boundary is an internal interface made of HOLE_BDRY edges.  Square
    boundary nodes sit at uniform spacing so opposite faces carry identical
    node distributions.
    """
    if r + h_ref >= 0.5:
        raise GeometryError(f"r + h_ref = {r + h_ref} >= 0.5")
    m = max(1, int(round(1.0 / h_ref)))

    if r == 0.0:
        nodes, tris, edges = _structured_square(m)
        mesh = Mesh(
            nodes=nodes,
            triangles=tris,
            tri_region=np.zeros(len(tris), dtype=np.int64),
            tri_cell=np.zeros((len(tris), 2), dtype=np.int64),
            boundary_edges=edges,
            edge_kind=np.full(len(edges), OUTER, dtype=np.int64),
            edge_cell=np.full((len(edges), 2), _NO_CELL[0], dtype=np.int64),
            meta={"h_ref": h_ref, "m": m, "r": r, "n_b": n_b,
                  "cell_area": 1.0, "hole_perimeter": 0.0},
        )
        mesh.meta["face_keys"] = _structured_face_keys(mesh, m)
        return _validate(mesh, "cell mesh")

    if n_b < 8:
        raise GeometryError(f"hole polygon needs >= 8 vertices, got {n_b}")
    n_ring = 4 * m
    if n_ring < n_b:
        raise GeometryError(
            f"h_ref={h_ref} too coarse for a {n_b}-gon hole: "
            f"need 4*round(1/h_ref) >= n_b"
        )

    # inner contour: the polygon, refined to exactly n_ring nodes with all
    # vertices retained (base segments per edge, remainder spread first)
    verts = _polygon(r, n_b)
    base, rem = divmod(n_ring, n_b)
    inner = []
    inner_vertex_flags = []
    for e in range(n_b):
        p0 = verts[e]
        p1 = verts[(e + 1) % n_b]
        segs = base + (1 if e < rem else 0)
        for s in range(segs):
            t = s / segs
            inner.append((1.0 - t) * p0 + t * p1)
            inner_vertex_flags.append(s == 0)
    inner = np.array(inner)

    outer, outer_keys = _square_boundary_nodes(m)

    # rotate the outer contour so index 0 sits nearest the inner start angle
    c = np.array([0.5, 0.5])
    ang_in0 = np.arctan2(inner[0, 1] - 0.5, inner[0, 0] - 0.5)
    ang_out = np.arctan2(outer[:, 1] - 0.5, outer[:, 0] - 0.5)
    diff = np.abs((ang_out - ang_in0 + np.pi) % (2.0 * np.pi) - np.pi)
    rot = int(np.argmin(diff))
    order = (np.arange(n_ring) + rot) % n_ring
    outer_m = outer[order]
    outer_keys_m = outer_keys[order]

    # layered ring between polygon and square, matched node indices
    n_layers = max(1, int(round((0.5 - r) / h_ref)))
    node_list = []
    ring_ids = np.empty((n_layers + 1, n_ring), dtype=np.int64)
    for l in range(n_layers + 1):
        t = l / n_layers
        for i in range(n_ring):
            if l == 0:
                p = inner[i]
            elif l == n_layers:
                p = outer_m[i]
            else:
                p = (1.0 - t) * inner[i] + t * outer_m[i]
            ring_ids[l, i] = len(node_list)
            node_list.append(p)
    center_id = len(node_list)
    node_list.append(c)

    tris = []
    regions = []
    for l in range(n_layers):
        for i in range(n_ring):
            j = (i + 1) % n_ring
            a, b = ring_ids[l, i], ring_ids[l, j]
            cc, d = ring_ids[l + 1, j], ring_ids[l + 1, i]
            # CCW: inner runs counterclockwise, so the quad closes via outer
            tris.append((a, cc, b))
            tris.append((a, d, cc))
            regions.extend((FLUID, FLUID))
    for i in range(n_ring):  # hole interior fan
        j = (i + 1) % n_ring
        tris.append((center_id, ring_ids[0, i], ring_ids[0, j]))
        regions.append(HOLE)

    edges = []
    kinds = []
    for i in range(n_ring):
        j = (i + 1) % n_ring
        edges.append((ring_ids[0, i], ring_ids[0, j]))
        kinds.append(HOLE_BDRY)
        edges.append((ring_ids[n_layers, i], ring_ids[n_layers, j]))
        kinds.append(OUTER)

    edge_cell = np.zeros((len(edges), 2), dtype=np.int64)
    edge_cell[np.array(kinds) == OUTER] = _NO_CELL[0]

    mesh = Mesh(
        nodes=np.array(node_list),
        triangles=np.array(tris, dtype=np.int64),
        tri_region=np.array(regions, dtype=np.int64),
        tri_cell=np.zeros((len(tris), 2), dtype=np.int64),
        boundary_edges=np.array(edges, dtype=np.int64),
        edge_kind=np.array(kinds, dtype=np.int64),
        edge_cell=edge_cell,
        meta={
            "h_ref": h_ref, "m": m, "r": r, "n_b": n_b,
            "cell_area": 1.0 - polygon_area(r, n_b),
            "hole_perimeter": polygon_perimeter(r, n_b),
        },
    )
    # exact integer face keys for the square-boundary nodes, used for periodic
    # pairing and for tile stitching
    face_keys = {}
    for i in range(n_ring):
        face_keys[int(ring_ids[n_layers, i])] = tuple(int(v) for v in outer_keys_m[i])
    mesh.meta["face_keys"] = face_keys
    return _validate(mesh, "cell mesh")


def _structured_face_keys(mesh: Mesh, m: int) -> dict[int, tuple[int, int]]:
    """Integer (kx, ky) keys, units 1/m, for structured-grid boundary nodes."""
    keys = {}
    for n in np.unique(mesh.boundary_edges):
        x, y = mesh.nodes[n]
        keys[int(n)] = (int(round(x * m)), int(round(y * m)))
    return keys


def build_perforated_mesh(cfg: DomainConfig, cell: Mesh) -> Mesh:
    """Tile n x n scaled copies of the template and drop the hole triangles.

    Shared-face nodes are stitched by integer lattice keys, never by float
    comparison.  The returned mesh carries the full tiled mesh (holes kept)
    and the fluid-to-full node map in its meta, for the extension operator.
    """
    n = cfg.n_cells
    full = tile_template(cfg, cell)

    keep_tri = full.tri_region == FLUID
    tris = full.triangles[keep_tri]
    used = np.zeros(full.n_nodes, dtype=bool)
    used[tris.ravel()] = True
    new_of_old = -np.ones(full.n_nodes, dtype=np.int64)
    new_of_old[used] = np.arange(int(used.sum()))

    edges = []
    kinds = []
    cells = []
    for (a, b), kind, cix in zip(full.boundary_edges, full.edge_kind, full.edge_cell):
        if used[a] and used[b]:
            edges.append((new_of_old[a], new_of_old[b]))
            kinds.append(kind)
            cells.append(cix)

    mesh = Mesh(
        nodes=full.nodes[used],
        triangles=new_of_old[tris],
        tri_region=np.zeros(len(tris), dtype=np.int64),
        tri_cell=full.tri_cell[keep_tri],
        boundary_edges=np.array(edges, dtype=np.int64),
        edge_kind=np.array(kinds, dtype=np.int64),
        edge_cell=np.array(cells, dtype=np.int64),
        eps=cfg.eps,
        meta={
            "template": cell,
            "full_mesh": full,
            "fluid_to_full": np.nonzero(used)[0],
            "n": n,
            "n_holes": n * n if cfg.hole_radius > 0.0 else 0,
        },
    )
    return _validate(mesh, "perforated mesh")


def tile_template(cfg: DomainConfig, cell: Mesh) -> Mesh:
    """Full n x n tiling of the template over the unit square, holes retained."""
    n = cfg.n_cells
    eps = cfg.eps
    m = cell.meta["m"]
    face_keys: dict[int, tuple[int, int]] = cell.meta["face_keys"]

    shared: dict[tuple[int, int], int] = {}  # global lattice key -> node id
    nodes = []
    all_tris = []
    all_reg = []
    all_cell = []
    all_edges = []
    all_kinds = []
    all_ecell = []

    for iy in range(n):
        for ix in range(n):
            local_to_global = np.empty(cell.n_nodes, dtype=np.int64)
            for ln in range(cell.n_nodes):
                key = face_keys.get(ln)
                if key is not None:
                    gkey = (ix * m + key[0], iy * m + key[1])
                    gid = shared.get(gkey)
                    if gid is None:
                        gid = len(nodes)
                        shared[gkey] = gid
                        nodes.append((eps * (ix + cell.nodes[ln, 0]),
                                      eps * (iy + cell.nodes[ln, 1])))
                else:
                    gid = len(nodes)
                    nodes.append((eps * (ix + cell.nodes[ln, 0]),
                                  eps * (iy + cell.nodes[ln, 1])))
                local_to_global[ln] = gid
            all_tris.append(local_to_global[cell.triangles])
            all_reg.append(cell.tri_region)
            all_cell.append(np.broadcast_to((ix, iy), (cell.n_triangles, 2)))
            for (a, b), kind in zip(cell.boundary_edges, cell.edge_kind):
                if kind == HOLE_BDRY:
                    all_edges.append((local_to_global[a], local_to_global[b]))
                    all_kinds.append(HOLE_BDRY)
                    all_ecell.append((ix, iy))
                else:
                    # template face edge: outer boundary only on the domain edge
                    ka = face_keys[int(a)]
                    kb = face_keys[int(b)]
                    on_domain = (
                        (ka[0] == 0 and kb[0] == 0 and ix == 0)
                        or (ka[0] == m and kb[0] == m and ix == n - 1)
                        or (ka[1] == 0 and kb[1] == 0 and iy == 0)
                        or (ka[1] == m and kb[1] == m and iy == n - 1)
                    )
                    if on_domain:
                        all_edges.append((local_to_global[a], local_to_global[b]))
                        all_kinds.append(OUTER)
                        all_ecell.append(_NO_CELL)

    mesh = Mesh(
        nodes=np.array(nodes),
        triangles=np.concatenate(all_tris),
        tri_region=np.concatenate(all_reg),
        tri_cell=np.concatenate(all_cell).astype(np.int64),
        boundary_edges=np.array(all_edges, dtype=np.int64),
        edge_kind=np.array(all_kinds, dtype=np.int64),
        edge_cell=np.array(all_ecell, dtype=np.int64),
        eps=eps,
        meta={"template": cell, "n": n},
    )
    return _validate(mesh, "tiled mesh")


def build_domain_mesh(rect: tuple[float, float, float, float], h: float) -> Mesh:
    """Structured triangulation of the rectangle A, all boundary edges OUTER."""
    x0, y0, x1, y1 = rect
    if not (x1 > x0 and y1 > y0):
        raise GeometryError(f"degenerate rectangle {rect}")
    nx = max(1, int(round((x1 - x0) / h)))
    ny = max(1, int(round((y1 - y0) / h)))

    ii, jj = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1), indexing="xy")
    nodes = np.column_stack([
        x0 + (x1 - x0) * (ii.ravel() / nx),
        y0 + (y1 - y0) * (jj.ravel() / ny),
    ])
    tris = []
    for j in range(ny):
        for i in range(nx):
            a = j * (nx + 1) + i
            b = a + 1
            c = a + nx + 2
            d = a + nx + 1
            tris.append((a, b, c))
            tris.append((a, c, d))
    edges = []
    for i in range(nx):
        edges.append((i, i + 1))
        edges.append((ny * (nx + 1) + i, ny * (nx + 1) + i + 1))
    for j in range(ny):
        edges.append((j * (nx + 1), (j + 1) * (nx + 1)))
        edges.append((j * (nx + 1) + nx, (j + 1) * (nx + 1) + nx))

    tris = np.array(tris, dtype=np.int64)
    mesh = Mesh(
        nodes=nodes,
        triangles=tris,
        tri_region=np.zeros(len(tris), dtype=np.int64),
        tri_cell=np.full((len(tris), 2), _NO_CELL[0], dtype=np.int64),
        boundary_edges=np.array(edges, dtype=np.int64),
        edge_kind=np.full(2 * (nx + ny), OUTER, dtype=np.int64),
        edge_cell=np.full((2 * (nx + ny), 2), _NO_CELL[0], dtype=np.int64),
        meta={"rect": rect, "nx": nx, "ny": ny},
    )
    return _validate(mesh, "domain mesh")


class _Locator:
    """Uniform-bin point location over the FLUID triangles of a mesh."""

    def __init__(self, mesh: Mesh, bins: int | None = None):
        self.mesh = mesh
        fl = mesh.fluid_triangles()
        self.fluid = fl
        pts = mesh.nodes[mesh.triangles[fl]]
        self.lo = mesh.nodes.min(axis=0)
        self.hi = mesh.nodes.max(axis=0)
        if bins is None:
            bins = max(1, int(np.sqrt(max(1, len(fl)) / 2.0)))
        self.nb = bins
        span = np.maximum(self.hi - self.lo, 1e-300)
        self.inv = bins / span
        self.grid: dict[tuple[int, int], list[int]] = {}
        bmin = np.clip(((pts.min(axis=1) - self.lo) * self.inv).astype(int), 0, bins - 1)
        bmax = np.clip(((pts.max(axis=1) - self.lo) * self.inv).astype(int), 0, bins - 1)
        for t_local, t in enumerate(fl):
            for bx in range(bmin[t_local, 0], bmax[t_local, 0] + 1):
                for by in range(bmin[t_local, 1], bmax[t_local, 1] + 1):
                    self.grid.setdefault((bx, by), []).append(int(t))
        for v in self.grid.values():
            v.sort()

    def query(self, x, tol: float = 1e-12):
        bx = int(np.clip((x[0] - self.lo[0]) * self.inv[0], 0, self.nb - 1))
        by = int(np.clip((x[1] - self.lo[1]) * self.inv[1], 0, self.nb - 1))
        nodes = self.mesh.nodes
        tris = self.mesh.triangles
        best = None
        for t in self.grid.get((bx, by), ()):
            p0, p1, p2 = nodes[tris[t]]
            det = (p1[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (p1[1] - p0[1])
            l1 = ((x[0] - p0[0]) * (p2[1] - p0[1]) - (p2[0] - p0[0]) * (x[1] - p0[1])) / det
            l2 = ((p1[0] - p0[0]) * (x[1] - p0[1]) - (x[0] - p0[0]) * (p1[1] - p0[1])) / det
            l0 = 1.0 - l1 - l2
            if l0 >= -tol and l1 >= -tol and l2 >= -tol:
                best = (t, np.clip((l0, l1, l2), 0.0, 1.0))
                break  # bin lists are sorted: first hit is the lowest index
        return best


def locate_point(mesh: Mesh, x, tol: float = 1e-12):
    """Find the FLUID triangle containing x.

    Returns (triangle index, barycentric coords) with the lowest-index
    triangle winning ties on shared edges, or None when x lies in no FLUID
    triangle (inside a hole or outside the mesh).
    """
    if mesh._locator is None:
        mesh._locator = _Locator(mesh)
    hit = mesh._locator.query(np.asarray(x, dtype=float), tol=tol)
    if hit is None:
        return None
    t, lam = hit
    lam = np.asarray(lam)
    return t, lam / lam.sum()


def interior_edge_counts(mesh: Mesh) -> dict[tuple[int, int], int]:
    """Multiplicity of every triangle edge; conformity means interior edges
    appear exactly twice and boundary edges once."""
    counts: dict[tuple[int, int], int] = {}
    for tri in mesh.triangles:
        for a, b in ((tri[0], tri[1]), (tri[1], tri[2]), (tri[2], tri[0])):
            key = (int(min(a, b)), int(max(a, b)))
            counts[key] = counts.get(key, 0) + 1
    return counts


def write_mesh_text(mesh: Mesh) -> str:
    """Line-oriented text dump: header, nodes, triangles, boundary edges."""
    out = io.StringIO()
    out.write(f"{mesh.n_nodes} nodes {mesh.n_triangles} triangles "
              f"{len(mesh.boundary_edges)} edges\n")
    for x, y in mesh.nodes:
        out.write(f"{x!r} {y!r}\n")
    region_name = {FLUID: "FLUID", HOLE: "HOLE"}
    for tri, reg, cix in zip(mesh.triangles, mesh.tri_region, mesh.tri_cell):
        out.write(f"{tri[0]} {tri[1]} {tri[2]} {region_name[int(reg)]} "
                  f"{cix[0]} {cix[1]}\n")
    for (a, b), kind, cix in zip(mesh.boundary_edges, mesh.edge_kind, mesh.edge_cell):
        tag = "OUTER" if kind == OUTER else f"HOLE_BDRY({cix[0]},{cix[1]})"
        out.write(f"{a} {b} {tag}\n")
    return out.getvalue()


def rect_distance(rect: tuple[float, float, float, float], x) -> float:
    """Signed-clamped distance to the rectangle boundary: positive inside,
    0 on the boundary and outside."""
    x0, y0, x1, y1 = rect
    d = min(x[0] - x0, x1 - x[0], x[1] - y0, y1 - x[1])
    return max(0.0, d)


def point_in_closed_rect(rect: tuple[float, float, float, float], x) -> bool:
    x0, y0, x1, y1 = rect
    return x0 <= x[0] <= x1 and y0 <= x[1] <= y1
