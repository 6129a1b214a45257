"""Populations and yields extracted from a finished propagation.

The ionization yield is the summed population of positive-continuum
eigenstates at the end of the pulse.  Negative-energy population is reported
separately and never counted as ionization; the box continuum is never
filtered by energy.  The four class sums partition the norm exactly because
they are computed from the same |C_K|^2 array.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil
from typing import Dict

import numpy as np

from .constants import C_AU
from .dirac import BOUND, CLASS_NAMES, CONTINUUM, NEGATIVE, SPURIOUS
from .propagate import RunResult
from .scaling import ionization_potential


@dataclass
class YieldReport:
    ionization: float          # positive-continuum population
    survival: float            # initial-state population
    bound_excitation: float    # other bound states
    negative_energy: float     # lower-continuum population (Dirac only)
    norm: float
    per_channel: Dict[str, Dict[str, float]]

    def as_dict(self) -> Dict:
        return dict(ionization=self.ionization, survival=self.survival,
                    bound_excitation=self.bound_excitation,
                    negative_energy=self.negative_energy, norm=self.norm,
                    per_channel=self.per_channel)


def ionization_yield(result: RunResult) -> YieldReport:
    cs = result.coupling
    p = np.abs(result.coeffs) ** 2
    cls = cs.classes
    if np.any(cls == SPURIOUS):
        raise RuntimeError("spurious states must not reach propagation")

    survival = float(p[cs.initial_index])
    ion = float(p[cls == CONTINUUM].sum())
    bound = float(p[cls == BOUND].sum()) - survival
    neg = float(p[cls == NEGATIVE].sum())

    per_channel: Dict[str, Dict[str, float]] = {}
    for slot in cs.slots:
        ps = p[slot.sl]
        entry = {}
        for code in (NEGATIVE, BOUND, CONTINUUM):
            sel = slot.classes == code
            if np.any(sel):
                entry[CLASS_NAMES[code]] = float(ps[sel].sum())
        per_channel[slot.label] = entry

    return YieldReport(ionization=ion, survival=survival, bound_excitation=bound,
                       negative_energy=neg, norm=float(p.sum()),
                       per_channel=per_channel)


def photon_count(Z: float, omega: float, relativistic: bool = True) -> int:
    """Minimum photon number to reach the continuum: ceil(I_p / omega)."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    ip = ionization_potential(Z, relativistic=relativistic)
    return int(ceil(ip / omega))


def pair_threshold_photons(omega: float) -> int:
    """Photons needed to bridge the 2 c^2 gap to the negative-energy branch."""
    if omega <= 0:
        raise ValueError("omega must be positive")
    return int(ceil(2.0 * C_AU**2 / omega))
