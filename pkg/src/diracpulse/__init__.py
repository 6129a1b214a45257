"""Ionization of hydrogenlike ions in strong laser pulses.

Spectral solvers for the time-dependent Dirac and Schrodinger equations in
the dipole approximation: B-spline field-free structure, dipole couplings in
length and velocity gauge with or without the negative-energy states, pulse
propagation, and the Z-scaling toolbox.
"""

__version__ = "0.1.0"

from .bspline import BandedMatrix, KnotGrid, RadialBasis, assemble, build_basis
from .config import ConfigError, RunConfig, SweepSpec, load_config, parse_config, render_config
from .constants import C_AU, HARTREE_EV, INTENSITY_AU_WCM2, WAVELENGTH_NM_AU, critical_field
from .dipole import CouplingSet, build_coupling, wigner3j
from .dirac import (BOUND, CONTINUUM, NEGATIVE, SPURIOUS, DiracState,
                    KappaChannel, enumerate_channels, ground_state,
                    solve_channel, solve_channels, sommerfeld_energy)
from .observables import YieldReport, ionization_yield, pair_threshold_photons, photon_count
from .propagate import PropagationSettings, RunResult, convergence_sweep, propagate
from .pulse import (PulseParams, field_to_intensity, intensity_to_field,
                    omega_to_wavelength, wavelength_to_omega)
from .runner import RunOutcome, run_once, run_sweep
from .scaling import (RateTable, ScaledConfig, ionization_potential,
                      keldysh_parameter, rate_scale, relativistic_ip_shift,
                      scale_config, scaled_charge)
from .schrodinger import (ground_state_nr, hydrogen_energy, solve_channel_nr,
                          solve_channels_nr)

__all__ = [
    "__version__",
    "BandedMatrix", "KnotGrid", "RadialBasis", "assemble", "build_basis",
    "ConfigError", "RunConfig", "SweepSpec", "load_config", "parse_config",
    "render_config",
    "C_AU", "HARTREE_EV", "INTENSITY_AU_WCM2", "WAVELENGTH_NM_AU",
    "critical_field",
    "CouplingSet", "build_coupling", "wigner3j",
    "BOUND", "CONTINUUM", "NEGATIVE", "SPURIOUS", "DiracState",
    "KappaChannel", "enumerate_channels", "ground_state", "solve_channel",
    "solve_channels", "sommerfeld_energy",
    "YieldReport", "ionization_yield", "pair_threshold_photons", "photon_count",
    "PropagationSettings", "RunResult", "convergence_sweep", "propagate",
    "PulseParams", "field_to_intensity", "intensity_to_field",
    "omega_to_wavelength", "wavelength_to_omega",
    "RunOutcome", "run_once", "run_sweep",
    "RateTable", "ScaledConfig", "ionization_potential", "keldysh_parameter",
    "rate_scale", "relativistic_ip_shift", "scale_config", "scaled_charge",
    "ground_state_nr", "hydrogen_energy", "solve_channel_nr",
    "solve_channels_nr",
]
