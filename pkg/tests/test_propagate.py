"""Interaction-picture propagation: closed-form oracles and integrator contracts."""

import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from diracpulse.dipole import ChannelSlot, CouplingBlock, CouplingSet
from diracpulse.dirac import BOUND, CLASS_NAMES, CONTINUUM
from diracpulse.propagate import PropagationSettings, propagate
from diracpulse.pulse import PulseParams, intensity_to_field


def two_level(e1=0.0, g=0.7, gauge="length"):
    slots = [ChannelSlot(key=0, label="a", angular=0.0, l=0, start=0, count=1,
                         energies=np.array([0.0]),
                         classes=np.array([BOUND], np.int8), coeffs=()),
             ChannelSlot(key=1, label="b", angular=1.0, l=1, start=1, count=1,
                         energies=np.array([e1]),
                         classes=np.array([CONTINUUM], np.int8), coeffs=())]
    sigma = 1.0 if gauge == "length" else -1.0
    return CouplingSet(theory="schrodinger", gauge=gauge,
                       include_negative=False, m=0.0, slots=slots,
                       blocks=[CouplingBlock(a=0, b=1, G=np.array([[g]]))],
                       energies=np.array([0.0, e1]),
                       classes=np.array([BOUND, CONTINUUM], np.int8),
                       sigma=sigma, initial_index=0)


def test_rabi_transfer_closed_form():
    g = 0.7
    pulse = PulseParams(omega=1.0, cycles=4, f0=0.3)
    res = propagate(two_level(g=g), pulse,
                    PropagationSettings(rtol=1e-11, atol=1e-14,
                                        checkpoints_per_cycle=8))
    worst = max(abs(c["populations"].get("positive-continuum", 0.0)
                    - math.sin(g * pulse.vector_potential(c["t"]))**2)
                for c in res.checkpoints)
    assert worst < 1e-8


def test_detuned_two_level_against_reference_integrator():
    # Same interaction-picture ODE integrated by an unrelated method.
    g, e1 = 0.7, 0.35
    pulse = PulseParams(omega=1.0, cycles=6, f0=0.4)
    res = propagate(two_level(e1=e1, g=g), pulse,
                    PropagationSettings(rtol=1e-10, atol=1e-13))

    def rhs(t, y):
        v = g * pulse.electric_field(t)
        return [-1j * v * np.exp(-1j * e1 * t) * y[1],
                -1j * v * np.exp(+1j * e1 * t) * y[0]]

    half = pulse.duration / 2
    ref = solve_ivp(rhs, (-half, half), [1.0 + 0j, 0.0 + 0j], method="DOP853",
                    rtol=1e-11, atol=1e-14, dense_output=False)
    assert ref.success
    np.testing.assert_allclose(np.abs(res.coeffs)**2, np.abs(ref.y[:, -1])**2,
                               rtol=0, atol=1e-9)


def test_zero_field_leaves_state_untouched(small_dirac):
    cs_len, _ = small_dirac
    pulse = PulseParams(omega=500.0, cycles=2, f0=0.0)
    res = propagate(cs_len, pulse, PropagationSettings())
    probs = np.abs(res.coeffs)**2
    assert abs(probs[cs_len.initial_index] - 1.0) < 1e-13
    probs[cs_len.initial_index] = 0.0
    assert probs.max() < 1e-26
    assert abs(res.norm - 1.0) < 1e-13


def test_propagation_is_deterministic(small_dirac):
    cs_len, _ = small_dirac
    pulse = PulseParams(omega=500.0, cycles=2, f0=intensity_to_field(5e22))
    a = propagate(cs_len, pulse, PropagationSettings())
    b = propagate(cs_len, pulse, PropagationSettings())
    assert np.array_equal(a.coeffs, b.coeffs)
    assert a.stats["n_steps"] == b.stats["n_steps"]


def test_norm_drift_scales_with_rtol(small_dirac):
    cs_len, _ = small_dirac
    pulse = PulseParams(omega=500.0, cycles=4, f0=intensity_to_field(5e23))
    drift = {}
    for rtol in (1e-6, 1e-10):
        res = propagate(cs_len, pulse, PropagationSettings(rtol=rtol,
                                                           atol=1e-13))
        drift[rtol] = abs(res.norm - 1.0)
    assert drift[1e-10] < drift[1e-6]
    assert drift[1e-10] < 1e-8


def test_velocity_gauge_needs_more_steps(small_dirac):
    # Velocity coupling beats at the rest-mass frequency between the upper
    # and negative branches; the stepper must resolve it.
    cs_len, cs_vel = small_dirac
    pulse = PulseParams(omega=500.0, cycles=4, f0=intensity_to_field(5e23))
    n_len = propagate(cs_len, pulse, PropagationSettings()).stats["n_steps"]
    n_vel = propagate(cs_vel, pulse, PropagationSettings()).stats["n_steps"]
    assert n_vel > n_len


def test_checkpoint_structure(small_dirac):
    cs_len, _ = small_dirac
    pulse = PulseParams(omega=500.0, cycles=4, f0=intensity_to_field(5e22))
    res = propagate(cs_len, pulse,
                    PropagationSettings(checkpoints_per_cycle=2))
    assert len(res.checkpoints) == 8
    times = [c["t"] in (None,) or c["t"] for c in res.checkpoints]
    assert all(t2 > t1 for t1, t2 in zip(times, times[1:]))
    assert math.isclose(times[-1], pulse.duration / 2, rel_tol=1e-12)
    for c in res.checkpoints:
        assert set(c["populations"]) <= set(CLASS_NAMES)
        assert c["norm"] == pytest.approx(1.0, abs=1e-8)
    final = res.checkpoints[-1]
    assert final["norm"] == pytest.approx(res.norm, abs=1e-12)
    for key in ("n_steps", "n_rhs", "wall_time_s", "rtol", "atol", "n_states",
                "n_blocks"):
        assert key in res.stats


def test_initial_index_override():
    cs = two_level(e1=0.2)
    pulse = PulseParams(omega=1.0, cycles=2, f0=0.0)
    res = propagate(cs, pulse, PropagationSettings(), initial_index=1)
    assert abs(abs(res.coeffs[1]) - 1.0) < 1e-13
    with pytest.raises(ValueError):
        propagate(cs, pulse, PropagationSettings(), initial_index=2)
    with pytest.raises(ValueError):
        propagate(cs, pulse, PropagationSettings(), initial_index=-1)


def test_settings_validation():
    with pytest.raises(ValueError):
        PropagationSettings(rtol=1e-3)
    with pytest.raises(ValueError):
        PropagationSettings(rtol=1e-13)
    with pytest.raises(ValueError):
        PropagationSettings(atol=0.0)
