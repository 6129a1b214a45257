"""Shared fixtures: one refined basis per nuclear charge, solved once per session.

The eigenvalue-grade head (n_geom=90, g=1.12) is deliberately finer than the
propagation default; these fixtures feed matrix-element and spectrum tests
where sub-1e-8 eigenvalues matter and nothing is time-stepped.
"""

import pytest

from diracpulse.bspline import build_basis
from diracpulse.dipole import build_coupling
from diracpulse.dirac import solve_channels
from diracpulse.schrodinger import solve_channels_nr

GOLD_N = 200
GOLD_K = 7
GOLD_HEAD = {"n_geom": 90, "g": 1.12}


@pytest.fixture(scope="session")
def basis_z50():
    return build_basis(5.0, GOLD_N, GOLD_K, **GOLD_HEAD)


@pytest.fixture(scope="session")
def dirac_z50(basis_z50):
    return solve_channels(basis_z50, 50.0, j_max=1.5)


@pytest.fixture(scope="session")
def basis_h():
    return build_basis(250.0, GOLD_N, GOLD_K, **GOLD_HEAD)


@pytest.fixture(scope="session")
def nonrel_h(basis_h):
    return solve_channels_nr(basis_h, 1.0, l_max=3)


@pytest.fixture(scope="session")
def rel_len(dirac_z50, basis_z50):
    return build_coupling(dirac_z50, basis_z50, "dirac", "length")


@pytest.fixture(scope="session")
def rel_vel(dirac_z50, basis_z50):
    return build_coupling(dirac_z50, basis_z50, "dirac", "velocity")


@pytest.fixture(scope="session")
def nr_len(nonrel_h, basis_h):
    return build_coupling(nonrel_h, basis_h, "schrodinger", "length",
                          include_negative=False)


@pytest.fixture(scope="session")
def nr_vel(nonrel_h, basis_h):
    return build_coupling(nonrel_h, basis_h, "schrodinger", "velocity",
                          include_negative=False)


@pytest.fixture(scope="session")
def small_dirac():
    # Coarse Z=50 system for integrator and bookkeeping tests
    # (fast to propagate; not eigenvalue-grade).
    basis = build_basis(5.0, 80, 7)
    spectra = solve_channels(basis, 50.0, j_max=0.5)
    cs_len = build_coupling(spectra, basis, "dirac", "length")
    cs_vel = build_coupling(spectra, basis, "dirac", "velocity")
    return cs_len, cs_vel


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    lines = getattr(config, "acceptance_lines", None)
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in lines:
            terminalreporter.write_line(line)
