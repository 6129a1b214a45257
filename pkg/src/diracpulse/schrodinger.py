"""Field-free radial Schrodinger spectra (nonrelativistic twin of dirac.py).

Radial equation for channel l, with R(r) = r * (radial wavefunction):

    -1/2 R'' + [ l(l+1)/(2 r^2) - Z/r ] R = E R .

Same retained B-spline set, same box, one n x n banded generalized
eigenproblem per l channel.  No negative-energy branch and no intruder states
here; classes are bound (E < 0) and positive-continuum.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Dict, Iterator, List

import numpy as np
import scipy.linalg

from .bspline import BandedMatrix, RadialBasis
from .dirac import BOUND, CLASS_NAMES, CONTINUUM

logger = logging.getLogger(__name__)


def hydrogen_energy(Z: float, n: int) -> float:
    """Bohr formula -Z^2 / (2 n^2), a.u."""
    if n < 1:
        raise ValueError("principal quantum number must be >= 1")
    return -Z * Z / (2.0 * n * n)


@dataclass
class SchrodingerState:
    l: int
    index: int
    energy: float
    coeff: np.ndarray
    cls: int

    @property
    def class_name(self) -> str:
        return CLASS_NAMES[self.cls]


@dataclass
class NonrelSpectrum:
    """Eigen-decomposition of one l channel; columns normalized to Int R^2 dr = 1."""

    l: int
    basis: RadialBasis
    z: float
    energies: np.ndarray  # (n,)
    C: np.ndarray         # (n, n) coefficient columns
    classes: np.ndarray   # (n,) int8

    def states(self) -> Iterator[SchrodingerState]:
        for i in range(len(self.energies)):
            yield self.state(i)

    def state(self, i: int) -> SchrodingerState:
        return SchrodingerState(l=self.l, index=i, energy=float(self.energies[i]),
                                coeff=self.C[:, i], cls=int(self.classes[i]))

    def count(self, cls: int) -> int:
        return int(np.sum(self.classes == cls))

    def keep_mask(self, include_negative: bool = False) -> np.ndarray:
        # Signature mirrors the Dirac channel; there is nothing to drop here.
        return np.ones(len(self.energies), dtype=bool)


def solve_channel_nr(basis: RadialBasis, Z: float, l: int) -> NonrelSpectrum:
    if Z <= 0:
        raise ValueError("Z must be positive")
    if l < 0:
        raise ValueError("l must be nonnegative")
    ops = basis.operators
    n = basis.n
    p_bw = ops.overlap.half_bandwidth
    h_dat = (0.5 * ops.stiffness.data
             + 0.5 * l * (l + 1) * ops.inv_r2.data
             - Z * ops.inv_r.data)
    h = BandedMatrix(dim=n, half_bandwidth=p_bw, data=h_dat, symmetric=True)
    w, vecs = scipy.linalg.eigh(h.toarray(), ops.overlap.toarray())
    cls = np.where(w < 0.0, BOUND, CONTINUUM).astype(np.int8)
    return NonrelSpectrum(l=l, basis=basis, z=Z, energies=w, C=vecs, classes=cls)


def solve_channels_nr(basis: RadialBasis, Z: float, l_max: int
                      ) -> Dict[int, NonrelSpectrum]:
    if l_max < 0:
        raise ValueError("l_max must be nonnegative")
    out = {}
    for l in range(l_max + 1):
        out[l] = solve_channel_nr(basis, Z, l)
        logger.debug("solved l=%d: %d bound", l, out[l].count(BOUND))
    return out


def ground_state_nr(spectra: Dict[int, NonrelSpectrum]) -> SchrodingerState:
    spec = spectra[0]
    idx = np.nonzero(spec.classes == BOUND)[0]
    if not len(idx):
        raise RuntimeError("no bound state in the l = 0 channel")
    return spec.state(int(idx[0]))
