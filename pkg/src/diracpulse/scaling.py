"""Z-scaling relations and rate-curve rescaling.

Under r -> r/Z, t -> t/Z^2 the nonrelativistic hydrogenlike problem maps onto
Z = 1: photon energies scale as Z^2, fields as Z^3 (intensities as Z^6), and
cycle counts are invariant.  The relativistic problem does not scale exactly;
it can be mimicked by a nonrelativistic ion with an effective charge chosen
to match the relativistic ionization potential.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from math import sqrt
from typing import TextIO, Union

import numpy as np
from scipy.interpolate import PchipInterpolator

from .constants import C_AU


def _s_factor(Z: float) -> float:
    x = Z / C_AU
    if not 0.0 < x < 1.0:
        raise ValueError(f"Z={Z} outside (0, c)")
    return sqrt(1.0 - x * x)


def ionization_potential(Z: float, relativistic: bool = True) -> float:
    """Ground-state binding energy in hartree.

    The relativistic form Z^2/(1+s) with s = sqrt(1-(Z/c)^2) is the exact
    point-nucleus 1s_1/2 value, written to avoid cancellation at small Z.
    """
    if Z <= 0:
        raise ValueError("Z must be positive")
    if not relativistic:
        return 0.5 * Z * Z
    return Z * Z / (1.0 + _s_factor(Z))


def relativistic_ip_shift(Z: float) -> float:
    """I_p(rel) - I_p(nonrel), in a form stable for small Z."""
    s = _s_factor(Z)
    return Z**4 / (2.0 * C_AU**2 * (1.0 + s) ** 2)


def scaled_charge(Z: float) -> float:
    """Effective charge Z' whose nonrelativistic I_p equals the relativistic
    I_p of charge Z: Z' = Z sqrt(2/(1+s))."""
    return Z * sqrt(2.0 / (1.0 + _s_factor(Z)))


def keldysh_parameter(Z: float, omega: float, f0: float) -> float:
    """Adiabaticity parameter sqrt(2 I_p) * omega / F0 for a hydrogenlike ion
    (nonrelativistic I_p, so sqrt(2 I_p) = Z)."""
    if f0 <= 0:
        raise ValueError("peak field must be positive")
    return Z * omega / f0


@dataclass(frozen=True)
class ScaledConfig:
    """One-electron pulse problem expressed at a new nuclear charge."""
    Z: float
    omega: float
    f0: float
    cycles: int
    r_max: float


def scale_config(cfg: ScaledConfig, Z_new: float) -> ScaledConfig:
    """Map a configuration to charge Z_new along the nonrelativistic scaling
    trajectory: omega ~ Z^2, F0 ~ Z^3, box radius ~ 1/Z, cycles fixed."""
    if Z_new <= 0:
        raise ValueError("Z must be positive")
    u = Z_new / cfg.Z
    return ScaledConfig(Z=Z_new, omega=cfg.omega * u**2, f0=cfg.f0 * u**3,
                        cycles=cfg.cycles, r_max=cfg.r_max / u)


class RateTable:
    """Ionization-rate curve Gamma(F0) in Z-scaled units.

    Columns are the peak field in units of Z^3 au and the cycle-averaged rate
    in units of Z^2 au.  Fields must be strictly increasing and rates
    positive; queries interpolate log Gamma monotonically and refuse to
    extrapolate.
    """

    HEADER = "f0_z3au,gamma_z2au"

    def __init__(self, f0: np.ndarray, gamma: np.ndarray):
        f0 = np.asarray(f0, dtype=float)
        gamma = np.asarray(gamma, dtype=float)
        if f0.ndim != 1 or f0.shape != gamma.shape or f0.size < 2:
            raise ValueError("need matching 1-d arrays with at least 2 rows")
        if np.any(np.diff(f0) <= 0):
            raise ValueError("fields must be strictly increasing")
        if np.any(gamma <= 0):
            raise ValueError("rates must be positive")
        self.f0 = f0
        self.gamma = gamma
        self._interp = PchipInterpolator(f0, np.log(gamma))

    def __call__(self, f0: Union[float, np.ndarray]) -> Union[float, np.ndarray]:
        f0a = np.asarray(f0, dtype=float)
        if np.any(f0a < self.f0[0]) or np.any(f0a > self.f0[-1]):
            raise ValueError("query outside tabulated field range")
        out = np.exp(self._interp(f0a))
        return float(out) if np.isscalar(f0) else out

    def save(self, fh: TextIO) -> None:
        fh.write(self.HEADER + "\n")
        for f, g in zip(self.f0, self.gamma):
            fh.write(f"{f:.17g},{g:.17g}\n")

    @classmethod
    def load(cls, fh: TextIO) -> "RateTable":
        header = fh.readline().strip()
        if header != cls.HEADER:
            raise ValueError(f"unexpected header {header!r}")
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
        return cls(data[:, 0], data[:, 1])

    def dumps(self) -> str:
        buf = io.StringIO()
        self.save(buf)
        return buf.getvalue()


def rate_scale(table: RateTable, Z: float) -> RateTable:
    """Predict the relativistic rate curve of charge Z from a scaled
    nonrelativistic one: evaluate the Z'-ion at the same absolute field and
    time, i.e. F0 -> F0 (Z'/Z)^3 on the scaled axis and Gamma -> Gamma
    (Z'/Z)^2.  The returned table is the input grid transformed exactly;
    interpolation happens only at query time."""
    u = scaled_charge(Z) / Z
    return RateTable(table.f0 * u**3, table.gamma * u**2)
