"""Pulse envelope, field/potential consistency, unit conversions."""

import math

import numpy as np
import pytest

from diracpulse.constants import INTENSITY_AU_WCM2, WAVELENGTH_NM_AU
from diracpulse.pulse import (
    PulseParams,
    field_to_intensity,
    intensity_to_field,
    omega_to_wavelength,
    wavelength_to_omega,
)


@pytest.fixture()
def pulse():
    return PulseParams(omega=0.47, cycles=12, f0=0.031)


def test_derived_quantities(pulse):
    assert math.isclose(pulse.duration, 2 * math.pi * 12 / 0.47, rel_tol=1e-15)
    assert math.isclose(pulse.a0, 0.031 / 0.47, rel_tol=1e-15)
    assert math.isclose(pulse.intensity_wcm2, field_to_intensity(0.031),
                        rel_tol=1e-15)


def test_field_is_minus_dA_dt(pulse):
    # Central differences on the open support, relative 1e-6.
    rng = np.random.default_rng(11)
    t = rng.uniform(-0.49, 0.49, 400) * pulse.duration
    h = 1e-6
    fd = -(pulse.vector_potential(t + h) - pulse.vector_potential(t - h)) / (2 * h)
    f = pulse.electric_field(t)
    np.testing.assert_allclose(f, fd, rtol=0, atol=3e-6 * np.abs(f).max() + 1e-12)


def test_field_at_center_and_edges(pulse):
    assert math.isclose(pulse.electric_field(0.0), -pulse.f0, rel_tol=1e-14)
    assert pulse.vector_potential(0.0) == 0.0
    half = pulse.duration / 2
    for t in (half, -half, half + 5.0, -half - 5.0):
        assert pulse.vector_potential(t) == 0.0
        assert pulse.electric_field(t) == 0.0
    # continuity walking onto the support
    eps = 1e-8 * pulse.duration
    assert abs(pulse.vector_potential(half - eps)) < 1e-12
    assert abs(pulse.electric_field(half - eps)) < 1e-6 * pulse.f0


def test_vector_potential_is_odd(pulse):
    t = np.linspace(0.0, 0.49 * pulse.duration, 100)
    np.testing.assert_allclose(pulse.vector_potential(-t),
                               -pulse.vector_potential(t), rtol=0, atol=1e-16)


def test_zero_net_momentum_transfer(pulse):
    # Int F dt = A(-T/2) - A(T/2) = 0 exactly; check the quadrature version.
    t = np.linspace(-pulse.duration / 2, pulse.duration / 2, 20001)
    integral = np.trapezoid(pulse.electric_field(t), t)
    assert abs(integral) < 1e-10 * pulse.f0 * pulse.duration


def test_peak_field_close_to_f0():
    pulse = PulseParams(omega=1.0, cycles=20, f0=0.5)
    t = np.linspace(-pulse.duration / 2, pulse.duration / 2, 200001)
    peak = np.abs(pulse.electric_field(t)).max()
    # envelope derivative shifts the extremum by O(1/N)
    assert abs(peak - pulse.f0) / pulse.f0 < 1.5 / 20


def test_parameter_validation():
    with pytest.raises(ValueError):
        PulseParams(omega=0.0, cycles=4, f0=0.1)
    with pytest.raises(ValueError):
        PulseParams(omega=1.0, cycles=0, f0=0.1)
    with pytest.raises(ValueError):
        PulseParams(omega=1.0, cycles=4, f0=-0.1)


def test_intensity_conversions():
    assert math.isclose(intensity_to_field(INTENSITY_AU_WCM2), 1.0,
                        rel_tol=1e-15)
    for i in (5e22, 5e23, 1e13):
        assert math.isclose(field_to_intensity(intensity_to_field(i)), i,
                            rel_tol=1e-14)
    # frozen spot checks used throughout the strong-field runs
    assert math.isclose(intensity_to_field(5e22), 1193.6191611231895, rel_tol=1e-12)
    assert math.isclose(intensity_to_field(5e23), 3774.555207968784, rel_tol=1e-12)
    with pytest.raises(ValueError):
        intensity_to_field(-1.0)


def test_wavelength_conversions():
    assert math.isclose(wavelength_to_omega(WAVELENGTH_NM_AU), 1.0,
                        rel_tol=1e-15)
    for lam in (0.05, 0.104, 45.56335):
        assert math.isclose(omega_to_wavelength(wavelength_to_omega(lam)), lam,
                            rel_tol=1e-14)
    with pytest.raises(ValueError):
        wavelength_to_omega(0.0)
    with pytest.raises(ValueError):
        omega_to_wavelength(-2.0)
