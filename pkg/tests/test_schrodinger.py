"""Nonrelativistic radial channels against the Bohr formula."""

import math

import numpy as np
import pytest

from diracpulse.bspline import build_basis
from diracpulse.dirac import BOUND, CONTINUUM
from diracpulse.schrodinger import (
    ground_state_nr,
    hydrogen_energy,
    solve_channel_nr,
    solve_channels_nr,
)


def test_hydrogen_energy_formula():
    assert hydrogen_energy(1.0, 1) == -0.5
    assert math.isclose(hydrogen_energy(1.0, 2), -0.125, rel_tol=1e-15)
    assert math.isclose(hydrogen_energy(50.0, 1), -1250.0, rel_tol=1e-15)
    with pytest.raises(ValueError):
        hydrogen_energy(1.0, 0)


def test_bound_levels_match_bohr(nonrel_h):
    # n <= 5, l <= 2 at rel 1e-9 on the refined-head basis; the f channel
    # straddles the head-tail seam and only reaches ~1e-8 there.
    for l in (0, 1, 2):
        spec = nonrel_h[l]
        bound = spec.energies[spec.classes == BOUND]
        for i, n in enumerate(range(l + 1, 6)):
            exact = hydrogen_energy(1.0, n)
            assert abs(bound[i] - exact) < 1e-9 * abs(exact), (l, n)
    bound_f = nonrel_h[3].energies[nonrel_h[3].classes == BOUND]
    assert abs(bound_f[0] - hydrogen_energy(1.0, 4)) < 1e-7 * abs(hydrogen_energy(1.0, 4))


def test_l_degeneracy(nonrel_h):
    # 2s and 2p share the Bohr energy; so do 3s/3p/3d.
    e2s = nonrel_h[0].energies[nonrel_h[0].classes == BOUND][1]
    e2p = nonrel_h[1].energies[nonrel_h[1].classes == BOUND][0]
    assert math.isclose(e2s, e2p, rel_tol=1e-9)
    e3 = [nonrel_h[0].energies[nonrel_h[0].classes == BOUND][2],
          nonrel_h[1].energies[nonrel_h[1].classes == BOUND][1],
          nonrel_h[2].energies[nonrel_h[2].classes == BOUND][0]]
    assert max(e3) - min(e3) < 1e-9 * abs(e3[0])


def test_high_z_scaling(basis_z50):
    spec = solve_channel_nr(basis_z50, 50.0, 0)
    e1 = spec.energies[spec.classes == BOUND][0]
    assert math.isclose(e1, -1250.0, rel_tol=1e-9)


def test_classes_partition_by_sign(nonrel_h):
    spec = nonrel_h[0]
    assert np.all(spec.energies[spec.classes == BOUND] < 0)
    assert np.all(spec.energies[spec.classes == CONTINUUM] >= 0)
    assert spec.count(BOUND) + spec.count(CONTINUUM) == len(spec.energies)
    assert np.all(spec.keep_mask())


def test_orthonormality(nonrel_h, basis_h):
    ov = basis_h.operators.overlap.toarray()
    spec = nonrel_h[1]
    gram = spec.C.T @ ov @ spec.C
    np.testing.assert_allclose(gram, np.eye(gram.shape[0]), rtol=0, atol=1e-10)


def test_continuum_density_grows_with_box():
    # Discretized continuum spacing scales like 1/R: double the box,
    # roughly double the states below a fixed energy.
    counts = {}
    for r_max in (30.0, 60.0):
        basis = build_basis(r_max, 80, 7, n_geom=20, g=1.1)
        spec = solve_channel_nr(basis, 1.0, 0)
        counts[r_max] = int(np.sum((spec.energies > 0.0) & (spec.energies < 0.5)))
    assert counts[60.0] > counts[30.0]


def test_ground_state_nr_selection(nonrel_h):
    gs = ground_state_nr(nonrel_h)
    assert gs.l == 0
    assert math.isclose(gs.energy, -0.5, rel_tol=1e-9)


def test_solve_channels_nr_keys(nonrel_h):
    assert sorted(nonrel_h.keys()) == [0, 1, 2, 3]
    with pytest.raises(ValueError):
        solve_channels_nr(build_basis(10.0, 12, 5, n_geom=4, g=1.2), 1.0, -1)
