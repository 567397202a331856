"""First-order two-scale correctors, eigenspace alignment and the residual
certificate for eigenvalue localization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.linalg as la

from . import fem, geometry
from .cell import CellSolution, eval_chi
from .errors import AlignmentError, GeometryError, SolverError
from .geometry import Mesh
from .spectral import DiscreteOperatorBundle, apply_Keps


@dataclass
class CorrectorField:
    """Nodal corrector values on the perforated-mesh DoFs."""

    values: np.ndarray
    cutoff_applied: bool
    source_index: int
    eps: float


@dataclass
class AlignmentResult:
    """Optimal orthogonal match between corrector and discrete eigenfamilies."""

    matrix: np.ndarray            # M_eps, (m, m) orthogonal
    heps_errors: np.ndarray       # per-mode error in the eps-norm
    l2_errors: np.ndarray
    gap: float                    # largest principal-angle sine of the spans


def recovered_gradient(mesh: Mesh, u: np.ndarray) -> np.ndarray:
    """Area-weighted average of adjacent element gradients at each node."""
    fl = mesh.fluid_triangles()
    tris = mesh.triangles[fl]
    areas = mesh.areas()[fl]
    grads = mesh.grads()[fl]
    gu = np.einsum("tla,tl->ta", grads, u[tris])   # per-element gradient
    acc = np.zeros((mesh.n_nodes, 2))
    wsum = np.zeros(mesh.n_nodes)
    for loc in range(3):
        np.add.at(acc, tris[:, loc], areas[:, None] * gu)
        np.add.at(wsum, tris[:, loc], areas)
    used = wsum > 0.0
    acc[used] /= wsum[used, None]
    return acc


class _AMeshEvaluator:
    """Evaluates a P1 field and its recovered gradient anywhere on the A mesh."""

    def __init__(self, a_mesh: Mesh, u: np.ndarray):
        self.mesh = a_mesh
        self.u = u
        self.grad = recovered_gradient(a_mesh, u)

    def __call__(self, x):
        hit = geometry.locate_point(self.mesh, x)
        if hit is None:
            return None
        t, lam = hit
        nodes = self.mesh.triangles[t]
        return float(lam @ self.u[nodes]), lam @ self.grad[nodes]


def build_corrector(u_hom: np.ndarray, a_mesh: Mesh, sol: CellSolution,
                    eps: float, bundle: DiscreteOperatorBundle,
                    cutoff: bool, source_index: int = 0) -> CorrectorField:
    """U(x) = u(x) + eps * psi(x) * chi(x/eps) . grad u(x) on the fluid nodes.

    Outside A the corrector is zero.  With cutoff=True, psi ramps linearly
    from 0 at dA to 1 at distance 2*eps, so |grad psi| = 1/(2 eps) <= 2/eps.
    """
    mesh = bundle.mesh
    rect = a_mesh.meta.get("rect")
    if rect is None:
        raise GeometryError("A mesh does not carry its rectangle metadata")
    ev = _AMeshEvaluator(a_mesh, u_hom)
    template = sol.mesh

    values = np.zeros(mesh.n_nodes)
    failures = []
    for n in range(mesh.n_nodes):
        x = mesh.nodes[n]
        d = geometry.rect_distance(rect, x)
        if d <= 0.0:
            continue
        hit = ev(x)
        if hit is None:
            failures.append(n)
            continue
        uval, ugrad = hit
        chi_val, _ = eval_chi(sol, template, x, eps)
        psi = min(1.0, d / (2.0 * eps)) if cutoff else 1.0
        values[n] = uval + eps * psi * float(chi_val @ ugrad)
    if failures:
        raise GeometryError(
            f"point location failed for {len(failures)} nodes inside A, "
            f"first offenders {failures[:5]}")
    return CorrectorField(values=bundle.red.restrict(values),
                          cutoff_applied=cutoff, source_index=source_index, eps=eps)


def align_eigenspaces(u_eps: np.ndarray, U: np.ndarray, M_mass,
                      A_form=None) -> AlignmentResult:
    """Orthogonal Procrustes match of the corrector family onto the discrete one.

    G[l,k] = <U^l, u^k>_M, SVD G = W diag(s) V', M_eps = W V'.  Per-mode
    errors of U^l - sum_k M_eps[l,k] u^k are reported in L2 and, when the
    bilinear-form matrix is supplied, in the eps-norm.
    """
    u_eps = np.atleast_2d(np.asarray(u_eps, dtype=float))
    U = np.atleast_2d(np.asarray(U, dtype=float))
    if u_eps.shape != U.shape:
        raise AlignmentError(f"family shapes differ: {U.shape} vs {u_eps.shape}")
    m = U.shape[0]
    G = np.array([[float(U[l] @ (M_mass @ u_eps[k])) for k in range(m)]
                  for l in range(m)])
    W, s, Vt = la.svd(G)
    if s.min() < 1e-12:
        raise AlignmentError(f"rank-deficient cross Gram, singular values {s}")
    M_eps = W @ Vt

    heps = np.zeros(m)
    l2 = np.zeros(m)
    for l in range(m):
        diff = U[l] - M_eps[l] @ u_eps
        l2[l] = np.sqrt(float(diff @ (M_mass @ diff)))
        if A_form is not None:
            heps[l] = np.sqrt(float(diff @ (A_form @ diff)))
    gap = eigenspace_gap(u_eps, U, M_mass)
    return AlignmentResult(matrix=M_eps, heps_errors=heps, l2_errors=l2, gap=gap)


def _orthonormalize(X: np.ndarray, M_mass) -> np.ndarray:
    G = np.array([[float(X[i] @ (M_mass @ X[j])) for j in range(len(X))]
                  for i in range(len(X))])
    try:
        L = la.cholesky(G, lower=True)
    except la.LinAlgError as exc:
        raise AlignmentError("linearly dependent span in eigenspace_gap") from exc
    return la.solve_triangular(L, X, lower=True)


def eigenspace_gap(span_a: np.ndarray, span_b: np.ndarray, M_mass) -> float:
    """Largest principal-angle sine between two equal-dimension M-spans."""
    A = np.atleast_2d(np.asarray(span_a, dtype=float))
    B = np.atleast_2d(np.asarray(span_b, dtype=float))
    if A.shape != B.shape:
        raise AlignmentError(f"span dimensions differ: {A.shape} vs {B.shape}")
    Ao = _orthonormalize(A, M_mass)
    Bo = _orthonormalize(B, M_mass)
    C = np.array([[float(Ao[i] @ (M_mass @ Bo[j])) for j in range(len(Bo))]
                  for i in range(len(Ao))])
    s = la.svd(C, compute_uv=False)
    smin = min(1.0, float(s.min()))
    return float(np.sqrt(max(0.0, 1.0 - smin * smin)))


@dataclass
class VisikResult:
    residual: float               # alpha = ||K U - mu U||_eps
    nearest_distance: float       # min_j |mu_j - mu| over the supplied spectrum
    nearest_index: int
    certificate: bool


def visik_check(bundle: DiscreteOperatorBundle, U: np.ndarray, mu: float,
                spectrum) -> VisikResult:
    """Residual localization: some discrete mu_j must lie within alpha of mu.

    U is normalized internally to unit eps-norm (idempotent when already
    normalized).  The certificate is exact for the self-adjoint discrete
    operator provided the truly nearest eigenvalue is inside the supplied
    spectrum, so callers should solve for enough modes.
    """
    U = np.asarray(U, dtype=float)
    A = bundle.A
    nrm = np.sqrt(float(U @ (A @ U)))
    if nrm == 0.0:
        raise SolverError("zero eps-norm trial field in visik_check")
    U = U / nrm
    KU = apply_Keps(bundle, U)
    diff = KU - mu * U
    alpha = np.sqrt(float(diff @ (A @ diff)))
    mus = 1.0 / spectrum.eigenvalues
    j = int(np.argmin(np.abs(mus - mu)))
    dist = float(np.abs(mus[j] - mu))
    return VisikResult(residual=alpha, nearest_distance=dist, nearest_index=j,
                       certificate=dist <= alpha * (1.0 + 1e-8))
