"""cos^2-envelope laser pulse in the dipole approximation.

The vector potential (not the field) carries the envelope,

    A(t) = A0 cos^2(pi t / T) sin(w t),   |t| < T/2,   T = 2 pi N / w,

and F(t) = -dA/dt, which guarantees a vanishing DC component
(Int F dt = A(-T/2) - A(T/2) = 0) for any cycle count N.  A0 = F0 / w.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import ceil, pi, sqrt

import numpy as np

from .constants import INTENSITY_AU_WCM2, WAVELENGTH_NM_AU


def intensity_to_field(intensity_wcm2: float) -> float:
    """Peak field (a.u.) for a peak intensity in W/cm^2."""
    if intensity_wcm2 < 0:
        raise ValueError("intensity must be nonnegative")
    return sqrt(intensity_wcm2 / INTENSITY_AU_WCM2)


def field_to_intensity(f0: float) -> float:
    return f0 * f0 * INTENSITY_AU_WCM2


def wavelength_to_omega(lambda_nm: float) -> float:
    """Photon energy (a.u.) of a vacuum wavelength in nm."""
    if lambda_nm <= 0:
        raise ValueError("wavelength must be positive")
    return WAVELENGTH_NM_AU / lambda_nm


def omega_to_wavelength(omega: float) -> float:
    if omega <= 0:
        raise ValueError("photon energy must be positive")
    return WAVELENGTH_NM_AU / omega


@dataclass(frozen=True)
class PulseParams:
    """Carrier frequency, cycle count and peak field, all in a.u."""

    omega: float
    cycles: float
    f0: float

    def __post_init__(self):
        if self.omega <= 0:
            raise ValueError("omega must be positive")
        if self.cycles < 1:
            raise ValueError("need at least one carrier cycle")
        if self.f0 < 0:
            raise ValueError("peak field must be nonnegative")

    @property
    def a0(self) -> float:
        return self.f0 / self.omega

    @property
    def duration(self) -> float:
        return 2.0 * pi * self.cycles / self.omega

    @property
    def intensity_wcm2(self) -> float:
        return field_to_intensity(self.f0)

    def vector_potential(self, t):
        """A(t), scalar or array argument."""
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.duration
        env = np.cos(pi * t / self.duration) ** 2
        a = self.a0 * env * np.sin(self.omega * t)
        out = np.where(np.abs(t) < half, a, 0.0)
        return float(out) if out.ndim == 0 else out

    def electric_field(self, t):
        """F(t) = -dA/dt, scalar or array argument."""
        t = np.asarray(t, dtype=float)
        half = 0.5 * self.duration
        x = pi * t / self.duration
        f = self.a0 * ((pi / self.duration) * np.sin(2.0 * x) * np.sin(self.omega * t)
                       - self.omega * np.cos(x) ** 2 * np.cos(self.omega * t))
        out = np.where(np.abs(t) < half, f, 0.0)
        return float(out) if out.ndim == 0 else out
