"""Two-scale correctors, Procrustes alignment, principal-angle gaps and the
residual localization certificate."""

import numpy as np
import pytest

from homoglab import corrector as corr
from homoglab import geometry, spectral
from homoglab.cell import solve_cell_problem
from homoglab.errors import AlignmentError, SolverError
from homoglab.harness import _expand_dirichlet, _interp_to_mesh

K_RECT = (0.25, 0.25, 0.75, 0.75)


@pytest.fixture(scope="module")
def hom_field(a_mesh32, cell_sol8):
    spec, _ = spectral.solve_homogenized_evp(
        a_mesh32, cell_sol8.a_hom, cell_sol8.cell_area, 1)
    return _expand_dirichlet(a_mesh32, spec.eigenvectors[:, 0])


@pytest.fixture(scope="module")
def sweep(template8, cell_sol8, a_mesh32, hom_field):
    """Correctors with and without cutoff over three cell sizes."""
    out = {}
    for eps in (0.25, 0.125, 0.0625):
        cfg = geometry.DomainConfig(eps=eps, hole_radius=0.25, hole_poly=32,
                                    k_rect=K_RECT, h_ref=1.0 / 8.0)
        bundle = spectral.build_perforated_bundle(cfg, template8)
        u_off = corr.build_corrector(hom_field, a_mesh32, cell_sol8, eps,
                                     bundle, cutoff=False)
        u_on = corr.build_corrector(hom_field, a_mesh32, cell_sol8, eps,
                                    bundle, cutoff=True)
        out[eps] = (bundle, u_off, u_on)
    return out


def test_no_hole_corrector_is_interpolant(a_mesh32, hom_field):
    cell0 = geometry.build_cell_mesh(0.0, 32, 1.0 / 8.0)
    sol0 = solve_cell_problem(cell0)
    cfg = geometry.DomainConfig(eps=0.25, hole_radius=0.0, hole_poly=32,
                                k_rect=K_RECT, h_ref=1.0 / 8.0)
    bundle = spectral.build_perforated_bundle(cfg, cell0)
    U = corr.build_corrector(hom_field, a_mesh32, sol0, 0.25, bundle, cutoff=False)
    interp = bundle.red.restrict(
        _interp_to_mesh(bundle.mesh, a_mesh32, hom_field))
    assert np.allclose(U.values, interp, atol=1e-12)
    assert U.cutoff_applied is False


def test_cutoff_only_acts_near_boundary(sweep, a_mesh32):
    rect = a_mesh32.meta["rect"]
    for eps, (bundle, u_off, u_on) in sweep.items():
        nodes = bundle.mesh.nodes[bundle.red.keep]
        far = np.array([geometry.rect_distance(rect, x) > 2.0 * eps
                        for x in nodes])
        assert np.array_equal(u_on.values[far], u_off.values[far])
        inside = np.array([geometry.rect_distance(rect, x) > 0.0 for x in nodes])
        # outside A both correctors vanish
        assert np.max(np.abs(u_on.values[~inside])) == 0.0


def test_corrector_amplitude_scales_with_eps(sweep, a_mesh32, hom_field):
    # the corrector term is eps * chi * grad u, so its L2 size decreases
    # with eps (each eps is measured on its own matched mesh)
    norms = []
    for eps in (0.25, 0.125, 0.0625):
        bundle, u_off, _ = sweep[eps]
        interp = bundle.red.restrict(
            _interp_to_mesh(bundle.mesh, a_mesh32, hom_field))
        d = u_off.values - interp
        norms.append(float(np.sqrt(d @ (bundle.M @ d))))
    for a, b in zip(norms, norms[1:]):
        assert a >= b - 1e-12


def test_alignment_identity_and_sign(dirichlet_spec32, a_mesh32):
    # two well-separated modes of the Dirichlet problem as the test family
    from homoglab import fem
    M = fem.assemble_mass(a_mesh32)
    u = np.stack([
        _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 0]),
        _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 3]),
    ])
    res = corr.align_eigenspaces(u, u, M)
    assert np.allclose(res.matrix, np.eye(2), atol=1e-10)
    assert np.allclose(res.l2_errors, 0.0, atol=1e-10)
    assert res.gap <= 1e-10

    res = corr.align_eigenspaces(u, -u, M)
    assert np.allclose(res.matrix, -np.eye(2), atol=1e-10)
    assert np.allclose(res.l2_errors, 0.0, atol=1e-10)


def test_alignment_recovers_rotation(dirichlet_spec32, a_mesh32):
    from homoglab import fem
    M = fem.assemble_mass(a_mesh32)
    u = np.stack([
        _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 0]),
        _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 3]),
    ])
    th = 0.37
    Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    res = corr.align_eigenspaces(u, Q @ u, M)
    assert np.allclose(res.matrix, Q, atol=1e-10)
    assert np.max(res.l2_errors) <= 1e-10
    # Procrustes never does worse than the identity alignment
    ident_err = np.sqrt(np.einsum("ln,ln->l", (Q @ u - u) @ M.toarray(), Q @ u - u))
    assert res.l2_errors.sum() <= ident_err.sum() + 1e-12


def test_alignment_errors(dirichlet_spec32, a_mesh32):
    from homoglab import fem
    M = fem.assemble_mass(a_mesh32)
    v1 = _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 0])
    v2 = _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 1])
    with pytest.raises(AlignmentError):
        corr.align_eigenspaces(v1[None, :], v2[None, :], M)  # orthogonal pair
    with pytest.raises(AlignmentError):
        corr.align_eigenspaces(np.stack([v1, v2]), v1[None, :], M)


def test_eigenspace_gap_limits(dirichlet_spec32, a_mesh32):
    from homoglab import fem
    M = fem.assemble_mass(a_mesh32)
    v1 = _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 0])
    v2 = _expand_dirichlet(a_mesh32, dirichlet_spec32.eigenvectors[:, 1])
    assert corr.eigenspace_gap(v1[None, :], v1[None, :], M) <= 1e-12
    assert corr.eigenspace_gap(v1[None, :], v2[None, :], M) == pytest.approx(1.0, abs=1e-10)
    # basis invariance: a rotated basis of the same span has zero gap
    u = np.stack([v1, v2])
    th = 1.1
    Q = np.array([[np.cos(th), -np.sin(th)], [np.sin(th), np.cos(th)]])
    assert corr.eigenspace_gap(u, Q @ u, M) <= 1e-10


def test_visik_certificate(spec_quarter, bundle_quarter):
    u1 = spec_quarter.eigenvectors[:, 0]
    mu1 = 1.0 / spec_quarter.eigenvalues[0]
    res = corr.visik_check(bundle_quarter, u1, mu1, spec_quarter)
    assert res.residual <= 1e-8
    assert res.nearest_distance <= 1e-12
    assert res.nearest_index == 0
    assert res.certificate

    # detuned trial value: residual equals the detuning exactly, so the
    # certificate still holds with zero slack
    delta = 1e-3
    res = corr.visik_check(bundle_quarter, u1, mu1 + delta, spec_quarter)
    assert res.residual == pytest.approx(delta, rel=1e-6)
    assert res.nearest_distance == pytest.approx(delta, rel=1e-9)
    assert res.certificate

    # random trial field against the full spectrum of a small dense problem
    rng = np.random.default_rng(12)
    w = rng.standard_normal(len(u1))
    from homoglab.eigensolve import solve_gevp
    full = solve_gevp(bundle_quarter.A, bundle_quarter.M, 12)
    res = corr.visik_check(bundle_quarter, w, 1.0 / full.eigenvalues[5], full)
    assert res.nearest_distance <= res.residual * (1.0 + 1e-8)

    with pytest.raises(SolverError):
        corr.visik_check(bundle_quarter, np.zeros(len(u1)), mu1, spec_quarter)


def test_corrector_consistency_order_eps(sweep, a_mesh32, hom_field):
    """The spec-mirrored 'error ~ eps with cutoff off' bound: the discrete
    eps-norm keeps the O(1) oscillatory gradient of the corrector term, so
    the measured error is flat in eps and the halving ratio sits near 1,
    not in [1.5, 2.5].  Kept as stated; fails honestly (see ledger)."""
    errs = []
    for eps in (0.25, 0.125, 0.0625):
        bundle, u_off, _ = sweep[eps]
        interp = bundle.red.restrict(
            _interp_to_mesh(bundle.mesh, a_mesh32, hom_field))
        d = u_off.values - interp
        errs.append(float(np.sqrt(d @ (bundle.A @ d))))
    for a, b in zip(errs, errs[1:]):
        assert 1.5 <= a / b <= 2.5


def test_cutoff_proximity_scaling(sweep):
    """||U_cutoff - U_plain||_L2 / eps^(3/2) stays in a factor-4 band."""
    vals = []
    for eps, (bundle, u_off, u_on) in sweep.items():
        d = u_on.values - u_off.values
        vals.append(float(np.sqrt(d @ (bundle.M @ d))) / eps**1.5)
    assert max(vals) / min(vals) <= 4.0
