"""Dipole couplings between field-free eigenstates (length and velocity forms).

For linear polarization along z the coupling between eigenstates factorizes as

    V_fi(t) = delta(m_f, m_i) * delta(|l_f - l_i|, 1) * W_fi * M_fi(t)

with W_fi a purely angular factor and M_fi a radial integral times the pulse
profile: the length form carries F(t) and the integral Int r (P_i P_f +
Q_i Q_f) dr, the velocity form carries A(t) and an antisymmetric combination
of large/small overlaps (relativistic) or of derivative and 1/r integrals
(nonrelativistic).  The -i prefactors of the velocity form are applied as the
time profile so the stored radial integrals stay real.

Sign conventions for the velocity integrals are pinned by two checks the test
suite applies to the assembled operators: Hermiticity of the full coupling
matrix and the commutator identity

    c * I_v = +(E_f - E_i) * I_l        (relativistic, per pair)
        I_v = -(E_f - E_i) * I_l        (nonrelativistic)

which both forms must satisfy on eigenstate pairs.  Only squared amplitudes
are observable, so a global sign is immaterial; per-pair consistency is not.
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial, sqrt
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from .bspline import RadialBasis
from .constants import C_AU
from . import dirac
from . import schrodinger as nrel

logger = logging.getLogger(__name__)


# ============================================================
# Wigner 3j (exact rational-surd evaluation)
# ============================================================

def _twice(x: float, name: str) -> int:
    t = 2.0 * x
    ti = int(round(t))
    if abs(t - ti) > 1e-9:
        raise ValueError(f"{name} = {x} is not a half-integer")
    return ti


def wigner3j(j1: float, j2: float, j3: float,
             m1: float, m2: float, m3: float) -> float:
    """Wigner 3j symbol, evaluated exactly via the Racah sum formula.

    All arithmetic is integer/rational up to one final square root, so the
    result is accurate to round-off for any angular momenta used here.
    Selection-rule violations return 0; inconsistent half-integers raise.
    """
    tj = [_twice(j1, "j1"), _twice(j2, "j2"), _twice(j3, "j3")]
    tm = [_twice(m1, "m1"), _twice(m2, "m2"), _twice(m3, "m3")]
    for a, b, nm in zip(tj, tm, ("1", "2", "3")):
        if a < 0:
            raise ValueError(f"j{nm} must be nonnegative")
        if (a + b) % 2:
            raise ValueError(f"j{nm} and m{nm} differ by a non-integer")
    if sum(tm) != 0:
        return 0.0
    if any(abs(b) > a for a, b in zip(tj, tm)):
        return 0.0
    if (tj[0] + tj[1] + tj[2]) % 2:
        return 0.0
    if not (abs(tj[0] - tj[1]) <= tj[2] <= tj[0] + tj[1]):
        return 0.0

    def f(twice: int) -> int:
        return factorial(twice // 2)

    pre = Fraction(f(tj[0] + tj[1] - tj[2]) * f(tj[0] - tj[1] + tj[2])
                   * f(-tj[0] + tj[1] + tj[2]), f(tj[0] + tj[1] + tj[2] + 2))
    pre *= (f(tj[0] + tm[0]) * f(tj[0] - tm[0]) * f(tj[1] + tm[1])
            * f(tj[1] - tm[1]) * f(tj[2] + tm[2]) * f(tj[2] - tm[2]))

    t_lo = max(0, (tj[1] - tj[2] - tm[0]) // 2, (tj[0] - tj[2] + tm[1]) // 2)
    t_hi = min((tj[0] + tj[1] - tj[2]) // 2, (tj[0] - tm[0]) // 2,
               (tj[1] + tm[1]) // 2)
    ssum = Fraction(0)
    for t in range(t_lo, t_hi + 1):
        den = (factorial(t)
               * f(tj[2] - tj[1] + tm[0] + 2 * t)
               * f(tj[2] - tj[0] - tm[1] + 2 * t)
               * f(tj[0] + tj[1] - tj[2] - 2 * t)
               * f(tj[0] - tm[0] - 2 * t)
               * f(tj[1] + tm[1] - 2 * t))
        ssum += Fraction(-1 if t % 2 else 1, den)
    phase = -1 if ((tj[0] - tj[1] - tm[2]) // 2) % 2 else 1
    return phase * float(ssum) * sqrt(pre.numerator / pre.denominator)


# ============================================================
# Angular factors (z polarization, m conserved)
# ============================================================

def angular_factor_rel(ch_f: dirac.KappaChannel, ch_i: dirac.KappaChannel,
                       m: float = 0.5) -> float:
    """W_fi between kappa channels at magnetic quantum number m.

    Zero unless |l_f - l_i| = 1 (parity) and the j triangle holds.
    Symmetric under exchange of the two channels.
    """
    if abs(ch_f.l - ch_i.l) != 1:
        return 0.0
    jf, ji = ch_f.j, ch_i.j
    w = wigner3j(jf, 1.0, ji, -m, 0.0, m) * wigner3j(jf, 1.0, ji, -0.5, 0.0, 0.5)
    if w == 0.0:
        return 0.0
    sign = -1.0 if (int(round(jf - m)) + int(round(ji + 0.5))) % 2 else 1.0
    return sign * sqrt((2 * jf + 1) * (2 * ji + 1)) * w


def angular_factor_nr(l_f: int, l_i: int, m: float = 0.0) -> float:
    """Nonrelativistic W_fi between l channels at magnetic quantum number m."""
    if abs(l_f - l_i) != 1:
        return 0.0
    w = wigner3j(l_f, 1.0, l_i, -m, 0.0, m) * wigner3j(l_f, 1.0, l_i, 0.0, 0.0, 0.0)
    if w == 0.0:
        return 0.0
    sign = -1.0 if (int(round(l_f - m)) + l_f) % 2 else 1.0
    return sign * sqrt((2 * l_f + 1) * (2 * l_i + 1)) * w


def delta_fi(kappa_f: int, kappa_i: int) -> float:
    """kappa_f - kappa_i, the small-component asymmetry weight.

    Pinned against an explicit spherical-spinor evaluation of the sigma_z
    matrix elements (Condon-Shortley phases): with this Delta the factorized
    velocity form reproduces <f| c alpha_z |i> exactly, which the closure and
    commutator-identity tests verify.  Antisymmetric under f <-> i.
    """
    return float(kappa_f - kappa_i)


# ============================================================
# Radial integrals (single pair; bulk versions live in build_coupling)
# ============================================================

def radial_length_rel(sf: dirac.DiracState, si: dirac.DiracState,
                      basis: RadialBasis) -> float:
    """Int r (P_i P_f + Q_i Q_f) dr."""
    rmat = basis.operators.radial.toarray()
    return float(sf.p @ rmat @ si.p + sf.q @ rmat @ si.q)


def radial_velocity_rel(sf: dirac.DiracState, si: dirac.DiracState,
                        basis: RadialBasis) -> float:
    """Int [(1 + D_fi) P_i Q_f - (1 - D_fi) Q_i P_f] dr with D = delta_fi."""
    s = basis.operators.overlap.toarray()
    d = delta_fi(sf.channel.kappa, si.channel.kappa)
    return float((1.0 + d) * (sf.q @ s @ si.p) - (1.0 - d) * (sf.p @ s @ si.q))


def radial_length_nr(sf: nrel.SchrodingerState, si: nrel.SchrodingerState,
                     basis: RadialBasis) -> float:
    """Int r R_i R_f dr."""
    rmat = basis.operators.radial.toarray()
    return float(sf.coeff @ rmat @ si.coeff)


def velocity_centrifugal_weight(l_f: int, l_i: int) -> float:
    """Coefficient of the 1/r term in the nonrel velocity integral.

    Equals l_i for the step down (l_f = l_i - 1) and -(l_i + 1) for the step
    up, written as one expression.  Fixed against the commutator identity on
    analytic hydrogen pairs.
    """
    if abs(l_f - l_i) != 1:
        raise ValueError("velocity integral only couples adjacent l")
    return 0.5 * (l_i * (l_i + 1) - l_f * (l_f + 1))


def radial_velocity_nr(sf: nrel.SchrodingerState, si: nrel.SchrodingerState,
                       basis: RadialBasis) -> float:
    """Int R_f [ R_i' + (lam/r) R_i ] dr with lam from velocity_centrifugal_weight."""
    ops = basis.operators
    lam = velocity_centrifugal_weight(sf.l, si.l)
    mat = ops.deriv.toarray() + lam * ops.inv_r.toarray()
    return float(sf.coeff @ mat @ si.coeff)


# ============================================================
# Coupling sets
# ============================================================

@dataclass
class ChannelSlot:
    """One angular channel's worth of retained states in the global vector."""

    key: int                 # kappa (dirac) or l (schrodinger)
    label: str
    angular: float           # j or l, used for truncation
    l: int
    start: int
    count: int
    energies: np.ndarray
    classes: np.ndarray
    coeffs: Tuple[np.ndarray, ...]  # (P, Q) or (C,), columns = kept states

    @property
    def stop(self) -> int:
        return self.start + self.count

    @property
    def sl(self) -> slice:
        return slice(self.start, self.stop)


@dataclass
class CouplingBlock:
    a: int                   # slot index of the ket channel
    b: int                   # slot index of the bra channel
    G: np.ndarray            # (count_b, count_a), real


@dataclass
class CouplingSet:
    """Static part of the dipole operator over the retained eigenstate set.

    The full interaction is  V(t) = time_factor(pulse, t) * V_struct  where
    V_struct has blocks G between adjacent channels and sigma * G^T back
    (sigma = +1 length, -1 velocity), making V(t) Hermitian for real pulses.
    """

    theory: str              # 'dirac' | 'schrodinger'
    gauge: str               # 'length' | 'velocity'
    include_negative: bool
    m: float
    slots: List[ChannelSlot]
    blocks: List[CouplingBlock]
    energies: np.ndarray     # (n_states,)
    classes: np.ndarray      # (n_states,) int8
    sigma: float
    initial_index: int

    @property
    def n_states(self) -> int:
        return len(self.energies)

    def time_factor(self, pulse, t: float) -> complex:
        if self.gauge == "length":
            return pulse.electric_field(t)
        a = pulse.vector_potential(t)
        return -1j * C_AU * a if self.theory == "dirac" else -1j * a

    def apply(self, u: np.ndarray, out: Optional[np.ndarray] = None) -> np.ndarray:
        """w = V_struct @ u for complex u, using real block GEMMs."""
        if out is None:
            out = np.zeros_like(u)
        else:
            out[:] = 0.0
        for blk in self.blocks:
            sa = self.slots[blk.a].sl
            sb = self.slots[blk.b].sl
            ua = np.column_stack((u[sa].real, u[sa].imag))
            wb = blk.G @ ua
            out[sb] += wb[:, 0] + 1j * wb[:, 1]
            ub = np.column_stack((u[sb].real, u[sb].imag))
            wa = blk.G.T @ ub
            out[sa] += self.sigma * (wa[:, 0] + 1j * wa[:, 1])
        return out

    def dense(self) -> np.ndarray:
        """Dense V_struct (tests and small systems)."""
        n = self.n_states
        v = np.zeros((n, n))
        for blk in self.blocks:
            v[self.slots[blk.b].sl, self.slots[blk.a].sl] = blk.G
            v[self.slots[blk.a].sl, self.slots[blk.b].sl] = self.sigma * blk.G.T
        return v

    def restrict(self, max_angular: float) -> "CouplingSet":
        """Drop channels above j (dirac) or l (schrodinger); reindex the rest."""
        keep = [i for i, s in enumerate(self.slots) if s.angular <= max_angular + 1e-9]
        if not keep:
            raise ValueError("restriction removes every channel")
        old_to_new = {o: n for n, o in enumerate(keep)}
        slots: List[ChannelSlot] = []
        pos = 0
        for o in keep:
            s = self.slots[o]
            slots.append(ChannelSlot(key=s.key, label=s.label, angular=s.angular,
                                     l=s.l, start=pos, count=s.count,
                                     energies=s.energies, classes=s.classes,
                                     coeffs=s.coeffs))
            pos += s.count
        blocks = [CouplingBlock(a=old_to_new[b.a], b=old_to_new[b.b], G=b.G)
                  for b in self.blocks if b.a in old_to_new and b.b in old_to_new]
        energies = np.concatenate([s.energies for s in slots])
        classes = np.concatenate([s.classes for s in slots])
        init_slot_old = None
        for i, s in enumerate(self.slots):
            if s.start <= self.initial_index < s.stop:
                init_slot_old = i
                off = self.initial_index - s.start
        if init_slot_old not in old_to_new:
            raise ValueError("restriction removes the initial state's channel")
        initial = slots[old_to_new[init_slot_old]].start + off
        return CouplingSet(theory=self.theory, gauge=self.gauge,
                           include_negative=self.include_negative, m=self.m,
                           slots=slots, blocks=blocks, energies=energies,
                           classes=classes, sigma=self.sigma,
                           initial_index=initial)


def _dirac_slots(spectra: Dict[int, dirac.ChannelSpectrum],
                 include_negative: bool) -> List[ChannelSlot]:
    slots = []
    pos = 0
    for kappa in sorted(spectra, key=lambda k: (abs(k), k > 0)):
        spec = spectra[kappa]
        mask = spec.keep_mask(include_negative)
        cnt = int(mask.sum())
        ch = spec.channel
        slots.append(ChannelSlot(
            key=kappa, label=ch.name, angular=ch.j, l=ch.l,
            start=pos, count=cnt,
            energies=spec.energies[mask], classes=spec.classes[mask],
            coeffs=(spec.P[:, mask], spec.Q[:, mask])))
        pos += cnt
    return slots


def _nonrel_slots(spectra: Dict[int, nrel.NonrelSpectrum]) -> List[ChannelSlot]:
    slots = []
    pos = 0
    for l in sorted(spectra):
        spec = spectra[l]
        cnt = len(spec.energies)
        slots.append(ChannelSlot(
            key=l, label=f"l={l}", angular=float(l), l=l,
            start=pos, count=cnt,
            energies=spec.energies, classes=spec.classes,
            coeffs=(spec.C,)))
        pos += cnt
    return slots


def build_coupling(spectra: Dict[int, object], basis: RadialBasis,
                   theory: str, gauge: str,
                   include_negative: bool = True,
                   m: Optional[float] = None,
                   verify: bool = True) -> CouplingSet:
    """Assemble the static dipole blocks between all adjacent channel pairs.

    ``verify`` recomputes every reverse block independently and checks it
    against sigma * G^T (Hermiticity of the assembled operator); cheap next
    to any propagation, so on by default.
    """
    if theory not in ("dirac", "schrodinger"):
        raise ValueError(f"unknown theory '{theory}'")
    if gauge not in ("length", "velocity"):
        raise ValueError(f"unknown gauge '{gauge}'")
    if theory == "schrodinger" and include_negative:
        raise ValueError("negative-energy states exist only in the Dirac theory")
    if m is None:
        m = 0.5 if theory == "dirac" else 0.0

    ops = basis.operators
    if theory == "dirac":
        slots = _dirac_slots(spectra, include_negative)
    else:
        slots = _nonrel_slots(spectra)

    rmat = ops.radial.toarray()
    smat = ops.overlap.toarray()
    dmat = ops.deriv.toarray()
    invr = ops.inv_r.toarray()
    sigma = 1.0 if gauge == "length" else -1.0

    def pair_block(sa: ChannelSlot, sb: ChannelSlot) -> Optional[np.ndarray]:
        """G[f in b, i in a] = W_ba * I_ba, or None if not coupled."""
        if abs(sa.l - sb.l) != 1:
            return None
        if theory == "dirac":
            w = angular_factor_rel(dirac.KappaChannel(sb.key),
                                   dirac.KappaChannel(sa.key), m)
        else:
            w = angular_factor_nr(sb.key, sa.key, m)
        if w == 0.0:
            return None
        if theory == "dirac":
            pa, qa = sa.coeffs
            pb, qb = sb.coeffs
            if gauge == "length":
                gint = pb.T @ rmat @ pa + qb.T @ rmat @ qa
            else:
                d = delta_fi(sb.key, sa.key)
                gint = (1.0 + d) * (qb.T @ smat @ pa) - (1.0 - d) * (pb.T @ smat @ qa)
        else:
            (ca,) = sa.coeffs
            (cb,) = sb.coeffs
            if gauge == "length":
                gint = cb.T @ rmat @ ca
            else:
                lam = velocity_centrifugal_weight(sb.l, sa.l)
                gint = cb.T @ (dmat + lam * invr) @ ca
        return w * gint

    blocks: List[CouplingBlock] = []
    for ia in range(len(slots)):
        for ib in range(ia + 1, len(slots)):
            g = pair_block(slots[ia], slots[ib])
            if g is None:
                continue
            if verify:
                g_rev = pair_block(slots[ib], slots[ia])
                resid = np.max(np.abs(g_rev - sigma * g.T))
                scale = np.max(np.abs(g)) or 1.0
                if resid > 1e-10 * scale:
                    raise RuntimeError(
                        f"coupling block {slots[ia].label} <-> {slots[ib].label} "
                        f"breaks Hermiticity (residual {resid:.2e})")
            blocks.append(CouplingBlock(a=ia, b=ib, G=g))

    energies = np.concatenate([s.energies for s in slots])
    classes = np.concatenate([s.classes for s in slots])

    # initial state: lowest bound state of the s channel
    s0 = next(s for s in slots if (s.key == -1 if theory == "dirac" else s.key == 0))
    bound_idx = np.nonzero(s0.classes == dirac.BOUND)[0]
    if not len(bound_idx):
        raise RuntimeError("no bound state available as initial state")
    initial = s0.start + int(bound_idx[0])

    logger.info("coupling set: %s/%s, %d channels, %d blocks, %d states",
                theory, gauge, len(slots), len(blocks), len(energies))
    return CouplingSet(theory=theory, gauge=gauge,
                       include_negative=include_negative, m=m, slots=slots,
                       blocks=blocks, energies=energies, classes=classes,
                       sigma=sigma, initial_index=initial)


# ============================================================
# Optional on-disk cache
# ============================================================

CACHE_VERSION = 1


def coupling_key(basis: RadialBasis, Z: float, theory: str, gauge: str,
                 include_negative: bool, max_angular: float, m: float) -> str:
    desc = dict(version=CACHE_VERSION, z=Z, theory=theory, gauge=gauge,
                include_negative=include_negative, max_angular=max_angular,
                m=m, r_max=basis.r_max, n=basis.n, k=basis.k,
                n_geom=basis.grid.n_geom, g=basis.grid.g,
                quad=basis.quad.points_per_interval)
    blob = json.dumps(desc, sort_keys=True).encode()
    return hashlib.sha256(blob).hexdigest()[:16]


def save_coupling(path: Union[str, Path], key: str, cs: CouplingSet) -> None:
    """Versioned binary dump of a coupling set (eigencoefficients excluded)."""
    arrays = {"energies": cs.energies, "classes": cs.classes}
    meta = dict(version=CACHE_VERSION, key=key, theory=cs.theory, gauge=cs.gauge,
                include_negative=cs.include_negative, m=cs.m, sigma=cs.sigma,
                initial_index=cs.initial_index,
                slots=[dict(key=s.key, label=s.label, angular=s.angular, l=s.l,
                            start=s.start, count=s.count) for s in cs.slots],
                blocks=[dict(a=b.a, b=b.b) for b in cs.blocks])
    for i, s in enumerate(cs.slots):
        arrays[f"slot{i}_energies"] = s.energies
        arrays[f"slot{i}_classes"] = s.classes
    for i, b in enumerate(cs.blocks):
        arrays[f"block{i}"] = b.G
    np.savez_compressed(path, meta=json.dumps(meta), **arrays)


def load_coupling(path: Union[str, Path], key: str) -> CouplingSet:
    with np.load(path, allow_pickle=False) as z:
        meta = json.loads(str(z["meta"]))
        if meta["version"] != CACHE_VERSION:
            raise ValueError(f"cache version {meta['version']} != {CACHE_VERSION}")
        if meta["key"] != key:
            raise ValueError("cache key mismatch; inputs changed since the dump")
        slots = [ChannelSlot(key=s["key"], label=s["label"], angular=s["angular"],
                             l=s["l"], start=s["start"], count=s["count"],
                             energies=z[f"slot{i}_energies"],
                             classes=z[f"slot{i}_classes"], coeffs=())
                 for i, s in enumerate(meta["slots"])]
        blocks = [CouplingBlock(a=b["a"], b=b["b"], G=z[f"block{i}"])
                  for i, b in enumerate(meta["blocks"])]
        return CouplingSet(theory=meta["theory"], gauge=meta["gauge"],
                           include_negative=meta["include_negative"], m=meta["m"],
                           slots=slots, blocks=blocks,
                           energies=z["energies"], classes=z["classes"],
                           sigma=meta["sigma"],
                           initial_index=meta["initial_index"])
