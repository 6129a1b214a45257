"""Field-free radial Dirac spectra for hydrogenlike ions in a B-spline box.

The radial Dirac Hamiltonian for relativistic quantum number kappa acts on the
large/small components (P, Q):

    (U + c^2) P + c (kappa/r - d/dr) Q = E P
    c (kappa/r + d/dr) P + (U - c^2) Q = E Q ,      U(r) = -Z/r .

Expanding both components in the same retained B-spline set and interleaving
coefficients as (p_1, q_1, p_2, q_2, ...) gives a symmetric banded generalized
eigenproblem of dimension 2n.  Its spectrum splits into exactly n
negative-energy (lower continuum) and n positive-energy solutions; energies
are stored with the rest energy c^2 subtracted.

kappa > 0 channels carry one unphysical intruder among the positive-energy
solutions (a known artifact of using identical expansion sets for P and Q).
It is always the lowest positive-energy state of the channel and is flagged
``spurious`` so every downstream consumer can skip it.
"""

from __future__ import annotations

import logging
import warnings
from dataclasses import dataclass, field
from typing import Dict, Iterator, List

import numpy as np
import scipy.linalg

from .bspline import BandedMatrix, RadialBasis, interleave_dirac
from .constants import C_AU

logger = logging.getLogger(__name__)

# State classes, stored as small ints in ChannelSpectrum.classes.
NEGATIVE, BOUND, CONTINUUM, SPURIOUS = 0, 1, 2, 3
CLASS_NAMES = ("negative-energy", "bound", "positive-continuum", "spurious")

# Width of the tolerance band around the classification thresholds.
CLASS_TOL_C2 = 1e-6


@dataclass(frozen=True)
class KappaChannel:
    """Relativistic angular channel labelled by kappa (nonzero integer)."""

    kappa: int

    def __post_init__(self):
        if self.kappa == 0:
            raise ValueError("kappa = 0 does not exist")

    @property
    def j(self) -> float:
        return abs(self.kappa) - 0.5

    @property
    def l(self) -> int:
        return self.kappa if self.kappa > 0 else -self.kappa - 1

    @property
    def l_bar(self) -> int:
        """Orbital momentum of the small component."""
        return self.l + 1 if self.kappa < 0 else self.l - 1

    @property
    def name(self) -> str:
        letters = "spdfghiklmnoqrtuv"
        let = letters[self.l] if self.l < len(letters) else f"(l={self.l})"
        return f"{let}{int(2 * self.j)}/2"


def enumerate_channels(j_max: float) -> List[KappaChannel]:
    """All kappa channels with j <= j_max, ordered by (j, sign of kappa)."""
    if j_max < 0.5 or (2 * j_max) % 1 != 0 or (2 * j_max) % 2 != 1:
        raise ValueError("j_max must be a positive half-integer (1/2, 3/2, ...)")
    out = []
    for kabs in range(1, int(j_max + 0.5) + 1):
        out.append(KappaChannel(-kabs))
        out.append(KappaChannel(kabs))
    return out


def sommerfeld_energy(Z: float, n: int, kappa: int) -> float:
    """Closed-form point-nucleus Dirac energy (rest energy subtracted), a.u.

    Evaluated through expm1/log1p so the small binding part survives the
    cancellation against c^2 at low Z.
    """
    if n < 1 or kappa == 0 or abs(kappa) > n or (kappa == n):
        raise ValueError(f"invalid Dirac quantum numbers n={n}, kappa={kappa}")
    x = Z / C_AU
    if abs(kappa) <= x:
        raise ValueError("Z too large for point-nucleus formula in this channel")
    gam = np.sqrt(kappa * kappa - x * x)
    denom = n - abs(kappa) + gam
    y = (x / denom) ** 2
    return C_AU**2 * np.expm1(-0.5 * np.log1p(y))


@dataclass
class DiracState:
    """Single eigenstate view: spline coefficients of P and Q plus labels."""

    channel: KappaChannel
    index: int          # position within the channel (energy ordered)
    energy: float       # a.u., rest energy subtracted
    p: np.ndarray
    q: np.ndarray
    cls: int

    @property
    def class_name(self) -> str:
        return CLASS_NAMES[self.cls]


@dataclass
class ChannelSpectrum:
    """Full eigen-decomposition of one kappa channel.

    Columns of P/Q are spline coefficient vectors, normalized to
    Int (P^2 + Q^2) dr = 1, ordered by increasing energy.
    """

    channel: KappaChannel
    basis: RadialBasis
    z: float
    energies: np.ndarray   # (2n,)
    P: np.ndarray          # (n, 2n)
    Q: np.ndarray          # (n, 2n)
    classes: np.ndarray    # (2n,) int8, values NEGATIVE..SPURIOUS

    def states(self) -> Iterator[DiracState]:
        for i in range(len(self.energies)):
            yield self.state(i)

    def state(self, i: int) -> DiracState:
        return DiracState(channel=self.channel, index=i,
                          energy=float(self.energies[i]),
                          p=self.P[:, i], q=self.Q[:, i],
                          cls=int(self.classes[i]))

    def count(self, cls: int) -> int:
        return int(np.sum(self.classes == cls))

    def keep_mask(self, include_negative: bool) -> np.ndarray:
        """Selection used everywhere downstream: spurious always dropped."""
        mask = self.classes != SPURIOUS
        if not include_negative:
            mask &= self.classes != NEGATIVE
        return mask


def _classify(energies: np.ndarray, n: int) -> np.ndarray:
    c2 = C_AU**2
    tol = CLASS_TOL_C2 * c2
    cls = np.full(len(energies), -1, dtype=np.int8)
    cls[energies < -2 * c2 + tol] = NEGATIVE
    upper = energies > -c2
    cls[upper & (energies < 0.0)] = BOUND
    cls[energies >= 0.0] = CONTINUUM
    if np.any(cls < 0):
        bad = energies[cls < 0]
        raise RuntimeError(f"eigenvalues inside the spectral gap, cannot classify: {bad}")
    n_neg = int(np.sum(cls == NEGATIVE))
    if n_neg != n:
        raise RuntimeError(f"expected {n} negative-energy solutions, found {n_neg}")
    return cls


def solve_channel(basis: RadialBasis, Z: float, kappa: int) -> ChannelSpectrum:
    """Diagonalize one kappa channel in the given basis."""
    if Z <= 0:
        raise ValueError("Z must be positive")
    if Z >= C_AU:
        raise ValueError("Z beyond the point-nucleus critical charge")
    ch = KappaChannel(kappa)
    ops = basis.operators
    c = C_AU
    n = basis.n

    v_pot = -Z * ops.inv_r.data
    s_dat = ops.overlap.data
    d_dat = ops.deriv.data
    kor = kappa * ops.inv_r.data

    p_bw = ops.overlap.half_bandwidth

    def mk(dat: np.ndarray) -> BandedMatrix:
        return BandedMatrix(dim=n, half_bandwidth=p_bw, data=dat)

    h_pp = mk(v_pot + c * c * s_dat)
    h_qq = mk(v_pot - c * c * s_dat)
    h_pq = mk(c * (kor - d_dat))
    h_qp = mk(c * (kor + d_dat))

    h = interleave_dirac(h_pp, h_pq, h_qp, h_qq)
    zero = mk(np.zeros_like(s_dat))
    s = interleave_dirac(ops.overlap, zero, zero, ops.overlap)

    w, vecs = scipy.linalg.eigh(h.toarray(), s.toarray())
    w = w - c * c
    cls = _classify(w, n)

    # kappa > 0: the lowest positive-energy solution is the basis intruder.
    if kappa > 0:
        upper = np.nonzero(cls != NEGATIVE)[0]
        spur = upper[0]
        cls[spur] = SPURIOUS
        rest = upper[1:]
        bound_rest = rest[w[rest] < 0.0]
        if len(bound_rest):
            ref = sommerfeld_energy(Z, ch.l + 1, kappa)
            got = w[bound_rest[0]]
            if abs(got - ref) > 1e-4 * abs(ref):
                warnings.warn(
                    f"kappa={kappa}: lowest bound state after intruder removal "
                    f"({got:.8g}) does not match the analytic value ({ref:.8g}); "
                    f"intruder identification may be off for this basis",
                    RuntimeWarning)

    return ChannelSpectrum(channel=ch, basis=basis, z=Z,
                           energies=w, P=vecs[0::2, :], Q=vecs[1::2, :],
                           classes=cls)


def solve_channels(basis: RadialBasis, Z: float, j_max: float
                   ) -> Dict[int, ChannelSpectrum]:
    """Spectra for every channel with j <= j_max, keyed by kappa."""
    out = {}
    for ch in enumerate_channels(j_max):
        out[ch.kappa] = solve_channel(basis, Z, ch.kappa)
        logger.debug("solved kappa=%+d: %d bound, %d continuum",
                     ch.kappa, out[ch.kappa].count(BOUND),
                     out[ch.kappa].count(CONTINUUM))
    return out


def ground_state(spectra: Dict[int, ChannelSpectrum]) -> DiracState:
    """The 1s_1/2 state (lowest bound state of kappa = -1)."""
    spec = spectra[-1]
    idx = np.nonzero(spec.classes == BOUND)[0]
    if not len(idx):
        raise RuntimeError("no bound state in the kappa = -1 channel")
    return spec.state(int(idx[0]))
