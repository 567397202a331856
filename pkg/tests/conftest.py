"""Shared fixtures: meshes and solves reused across the test modules."""

import os

# pin thread counts before numpy is imported anywhere so the determinism
# tests see a single-threaded BLAS
os.environ.setdefault("HOMOGLAB_THREADS", "1")
for _var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS",
             "NUMEXPR_NUM_THREADS"):
    os.environ.setdefault(_var, "1")

import pytest

from homoglab import geometry, spectral
from homoglab.cell import solve_cell_problem
from homoglab.harness import StudyConfig, run_study

K_RECT = (0.25, 0.25, 0.75, 0.75)

# verdict lines collected by the acceptance tests, replayed after the run so
# they are visible regardless of output capture
_ACCEPTANCE_LINES = []


@pytest.fixture(scope="session")
def acceptance_log():
    return _ACCEPTANCE_LINES


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if _ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in _ACCEPTANCE_LINES:
            terminalreporter.write_line(line)


@pytest.fixture(scope="session")
def template8():
    """Template cell mesh at the default study resolution."""
    return geometry.build_cell_mesh(0.25, 32, 1.0 / 8.0)


@pytest.fixture(scope="session")
def cell_sol8(template8):
    return solve_cell_problem(template8)


@pytest.fixture(scope="session")
def template32():
    """Fine template, matching the resolution the study uses for a_hom."""
    return geometry.build_cell_mesh(0.25, 32, 1.0 / 32.0)


@pytest.fixture(scope="session")
def cell_sol32(template32):
    return solve_cell_problem(template32)


@pytest.fixture(scope="session")
def bundle_quarter(template8):
    cfg = geometry.DomainConfig(eps=0.25, hole_radius=0.25, hole_poly=32,
                                k_rect=K_RECT, h_ref=1.0 / 8.0)
    return spectral.build_perforated_bundle(cfg, template8)


@pytest.fixture(scope="session")
def spec_quarter(bundle_quarter):
    spec, _ = spectral.solve_perforated_evp(
        bundle_quarter.meta["cfg"], 4, bundle=bundle_quarter)
    return spec


@pytest.fixture(scope="session")
def a_mesh32():
    """Macro mesh on A = [0.25, 0.75]^2 at h = side/32."""
    return geometry.build_domain_mesh(K_RECT, 0.5 / 32.0)


@pytest.fixture(scope="session")
def dirichlet_spec32(a_mesh32):
    spec, _ = spectral.solve_dirichlet_laplacian(a_mesh32, 4)
    return spec


@pytest.fixture(scope="session")
def study_report():
    """The default sweep, shared by the acceptance tests."""
    return run_study(StudyConfig())


@pytest.fixture(scope="session")
def study_report_repeat():
    """Second independent run of the same sweep, for determinism checks."""
    return run_study(StudyConfig())
