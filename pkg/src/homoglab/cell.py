"""Periodic cell problem: corrector chi, effective tensor a_hom and f_hom."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from . import fem, geometry
from .eigensolve import solve_source
from .errors import GeometryError, OutsideDomainError, SolverError
from .geometry import Mesh


@dataclass
class CellSolution:
    """Corrector fields chi^1, chi^2 on the template nodes (mean zero over Y),
    the effective tensor and the cell constants."""

    chi: np.ndarray               # (n_nodes, 2), column i is chi^i
    a_hom: np.ndarray             # 2x2
    cell_area: float              # |Y|
    hole_perimeter: float         # |Sigma^0|
    mesh: Mesh = field(repr=False, default=None)

    @property
    def c_star(self) -> float:
        return self.hole_perimeter / self.cell_area


def solve_cell_problem(cell_mesh: Mesh) -> CellSolution:
    """Solve int_Y (e_i + grad chi^i) . grad v = 0 over periodic v, both i.

    Uniqueness is fixed by pinning one retained node; the Y-mean is removed
    afterwards so int_Y chi^i = 0 holds exactly up to quadrature roundoff.
    """
    if "face_keys" not in cell_mesh.meta:
        raise GeometryError("mesh is not a template cell mesh (no face keys)")
    S = fem.assemble_stiffness(cell_mesh)
    M = fem.assemble_mass(cell_mesh)
    cmap = fem.periodic_constraints(cell_mesh)
    red = fem.apply_constraints(S, M, None, cmap, n_nodes=cell_mesh.n_nodes)

    # load: b_v = -int_Y e_i . grad(phi_v), assembled over fluid triangles
    fl = cell_mesh.fluid_triangles()
    tris = cell_mesh.triangles[fl]
    areas = cell_mesh.areas()[fl]
    grads = cell_mesh.grads()[fl]
    loads = np.zeros((cell_mesh.n_nodes, 2))
    for i in range(2):
        contrib = -areas[:, None] * grads[:, :, i]
        np.add.at(loads[:, i], tris.ravel(), contrib.ravel())
    loads_red = red.P.T @ loads

    # solve only over DoFs seen by fluid triangles (hole-interior nodes have
    # empty stiffness rows), pinning one of them for uniqueness
    nred = red.dim
    in_fluid = np.zeros(cell_mesh.n_nodes, dtype=bool)
    in_fluid[tris.ravel()] = True
    active = np.nonzero(in_fluid[red.keep])[0]
    if len(active) < 2:
        raise SolverError("cell problem has no fluid DoFs to solve for")
    free = active[1:]
    S_ff = red.S[free][:, free]
    chi = np.zeros((cell_mesh.n_nodes, 2))
    area_y = cell_mesh.fluid_area()
    ones = np.ones(cell_mesh.n_nodes)
    for i in range(2):
        rhs = loads_red[free, i]
        try:
            sol_free = solve_source(sp.csc_matrix(S_ff), rhs)
        except SolverError as exc:
            raise SolverError(f"cell problem solve failed for direction {i}: {exc}")
        sol_red = np.zeros(nred)
        sol_red[free] = sol_free
        full = red.expand(sol_red)
        mean = float(ones @ (M @ full)) / area_y
        chi[:, i] = full - mean

    sol = CellSolution(
        chi=chi,
        a_hom=np.eye(2),
        cell_area=area_y,
        hole_perimeter=float(cell_mesh.meta.get("hole_perimeter", 0.0)),
        mesh=cell_mesh,
    )
    sol.a_hom = compute_ahom(sol, cell_mesh)
    return sol


def compute_ahom(sol: CellSolution, cell_mesh: Mesh) -> np.ndarray:
    """a_hom[k,l] = int_Y (e_k + grad chi^k) . (e_l + grad chi^l) dx."""
    fl = cell_mesh.fluid_triangles()
    tris = cell_mesh.triangles[fl]
    areas = cell_mesh.areas()[fl]
    grads = cell_mesh.grads()[fl]
    # piecewise-constant corrected gradients e_k + grad chi^k per triangle
    gchi = np.einsum("tla,tlk->tka", grads, sol.chi[tris])  # (T, k, 2)
    eye = np.eye(2)
    corr = gchi + eye[None, :, :]
    a = np.einsum("t,tka,tla->kl", areas, corr, corr)
    return 0.5 * (a + a.T)


def fhom(xi, sol: CellSolution, direct: bool = False) -> float:
    """Homogenized energy density at xi.

    Default path is the quadratic form xi' a_hom xi; direct=True instead
    integrates |xi + grad(xi . chi)|^2 over Y as a cross check.
    """
    xi = np.asarray(xi, dtype=float)
    if not direct:
        return float(xi @ sol.a_hom @ xi)
    mesh = sol.mesh
    fl = mesh.fluid_triangles()
    tris = mesh.triangles[fl]
    areas = mesh.areas()[fl]
    grads = mesh.grads()[fl]
    w = sol.chi @ xi  # w_xi = xi . chi nodal field
    gw = np.einsum("tla,tl->ta", grads, w[tris])
    corr = gw + xi[None, :]
    return float(np.einsum("t,ta,ta->", areas, corr, corr))


def eval_chi(sol: CellSolution, cell_mesh: Mesh, x, eps: float):
    """chi(x/eps) and the piecewise-constant gradient of the containing triangle.

    The point is wrapped into the unit cell; landing inside the hole raises
    OutsideDomainError (callers must query fluid points only).
    """
    y = np.asarray(x, dtype=float) / eps
    y = y - np.floor(y)
    for d in range(2):
        if y[d] < 1e-12 or y[d] > 1.0 - 1e-12:
            y[d] = 0.0
    hit = geometry.locate_point(cell_mesh, y)
    if hit is None:
        raise OutsideDomainError(f"point {tuple(x)} maps into the hole at y={tuple(y)}")
    t, lam = hit
    nodes = cell_mesh.triangles[t]
    value = lam @ sol.chi[nodes]                       # (2,)
    grad = np.einsum("la,lk->ka", cell_mesh.grads()[t], sol.chi[nodes])  # (2,2) dchi^k/dy_a
    return value, grad
