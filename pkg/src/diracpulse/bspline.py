"""Radial B-spline machinery on [0, R].

Conventions used throughout the package:

* ``k`` is the spline order (piecewise polynomial degree ``k - 1``).
* A grid with ``N`` breakpoint intervals carries ``N + k - 1`` raw splines on
  the open knot vector (``k``-fold end knots).  The first and last raw
  splines are the only ones with nonzero boundary values, so they are dropped,
  leaving ``n = N + k - 3`` retained radial basis functions that vanish at
  ``r = 0`` and ``r = R``.  Retained index ``i`` equals raw index ``i + 1``.
* The breakpoint grid has a geometric head (``n_geom`` intervals with ratio
  ``g``) followed by a uniform tail whose interval length continues the last
  head interval.  This resolves the nuclear region without wasting splines at
  large ``r``.
* Galerkin matrices over retained splines are banded with half-bandwidth
  ``k - 1``; they are stored in general band layout ``data[p + i - j, j]``.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Optional, Tuple

import numpy as np

logger = logging.getLogger(__name__)


# ============================================================
# Breakpoint grids
# ============================================================

@dataclass(frozen=True)
class KnotGrid:
    """Breakpoint grid on [0, R] (geometry only, no spline order)."""

    r_max: float
    n_geom: int            # geometric head intervals
    g: float               # geometric ratio (> 1)
    breakpoints: np.ndarray  # strictly increasing, breakpoints[0] = 0, [-1] = r_max

    @property
    def n_intervals(self) -> int:
        return len(self.breakpoints) - 1


def build_grid(r_max: float, n_splines: int, k: int,
               n_geom: int = 40, g: float = 1.05) -> KnotGrid:
    """Build the breakpoint grid that supports ``n_splines`` retained splines.

    The interval count is ``n_splines - k + 3``.  The first ``n_geom``
    intervals grow geometrically with ratio ``g``; the remaining intervals all
    share the length of the last geometric interval.  Breakpoints are computed
    from closed-form partial sums (no cumulative rounding near r = 0).
    """
    if r_max <= 0.0:
        raise ValueError("r_max must be positive")
    if k < 2:
        raise ValueError("spline order k must be at least 2")
    if n_splines < k:
        raise ValueError("need at least k retained splines")
    if g <= 1.0:
        raise ValueError("geometric ratio g must exceed 1")
    if n_geom < 0:
        raise ValueError("n_geom must be nonnegative")

    n_int = n_splines - k + 3
    if n_geom >= n_int:
        raise ValueError(f"geometric head ({n_geom}) must be shorter than "
                         f"the interval count ({n_int})")

    if n_geom == 0:
        bkpts = np.linspace(0.0, r_max, n_int + 1)
    else:
        # head lengths d*g^0 .. d*g^(n_geom-1); tail intervals keep d*g^(n_geom-1)
        head_sum = (g**n_geom - 1.0) / (g - 1.0)
        tail_len = g ** (n_geom - 1)
        d = r_max / (head_sum + (n_int - n_geom) * tail_len)
        bkpts = np.empty(n_int + 1)
        i = np.arange(n_geom + 1)
        bkpts[: n_geom + 1] = d * (g**i - 1.0) / (g - 1.0)
        j = np.arange(1, n_int - n_geom + 1)
        bkpts[n_geom + 1:] = bkpts[n_geom] + j * d * tail_len
        bkpts[-1] = r_max
    return KnotGrid(r_max=r_max, n_geom=n_geom, g=g, breakpoints=bkpts)


# ============================================================
# Gauss-Legendre quadrature per interval
# ============================================================

@dataclass(frozen=True)
class QuadratureRule:
    """Gauss-Legendre nodes/weights mapped to every breakpoint interval.

    ``m`` points per interval integrate polynomials of degree 2m - 1 exactly;
    the default m = k is exact for all overlap and stiffness integrands.
    """

    points_per_interval: int
    nodes: np.ndarray    # (n_intervals, m)
    weights: np.ndarray  # (n_intervals, m)


def gauss_rule(grid: KnotGrid, points_per_interval: int) -> QuadratureRule:
    if points_per_interval < 1:
        raise ValueError("need at least one quadrature point per interval")
    x, w = np.polynomial.legendre.leggauss(points_per_interval)
    a = grid.breakpoints[:-1, None]
    b = grid.breakpoints[1:, None]
    half = 0.5 * (b - a)
    return QuadratureRule(points_per_interval=points_per_interval,
                          nodes=a + half * (x[None, :] + 1.0),
                          weights=half * w[None, :])


# ============================================================
# De Boor evaluation
# ============================================================

def _values_and_derivs(knots: np.ndarray, k: int, mu: int, x: float
                       ) -> Tuple[np.ndarray, np.ndarray]:
    """Values and first derivatives of the k raw splines nonzero on span mu.

    Cox-de Boor triangle; the order k-1 row is kept to form derivatives via
    the standard two-term recurrence.  Repeated knots give zero denominators,
    handled by dropping the corresponding term.
    """
    left = np.empty(k)
    right = np.empty(k)
    vals = np.zeros(k)
    vals[0] = 1.0
    lower = np.zeros(k)  # order k-1 values, padded
    for j in range(1, k):
        if j == k - 1:
            lower[:j] = vals[:j]
        left[j] = x - knots[mu + 1 - j]
        right[j] = knots[mu + j] - x
        saved = 0.0
        for r in range(j):
            den = right[r + 1] + left[j - r]
            temp = vals[r] / den if den != 0.0 else 0.0
            vals[r] = saved + right[r + 1] * temp
            saved = left[j - r] * temp
        vals[j] = saved
    if k == 1:
        return vals, np.zeros(k)

    ders = np.zeros(k)
    for r in range(k):
        i = mu - k + 1 + r  # raw spline index
        d = 0.0
        den1 = knots[i + k - 1] - knots[i]
        if den1 != 0.0 and r > 0:
            d += lower[r - 1] / den1
        den2 = knots[i + k] - knots[i + 1]
        if den2 != 0.0 and r < k - 1:
            d -= lower[r] / den2
        ders[r] = (k - 1) * d
    return vals, ders


class RadialBasis:
    """Retained B-spline basis with per-interval quadrature tables.

    Attributes
    ----------
    grid, k, n : geometry, spline order, retained spline count.
    knots : open knot vector with k-fold end knots.
    quad : QuadratureRule over the breakpoint intervals.
    qval, qder : (n_intervals, m, k) tables of raw spline values/derivatives
        at the quadrature nodes; raw spline ``i + a`` is column ``a`` of
        interval ``i``.
    """

    def __init__(self, grid: KnotGrid, k: int,
                 quad_points: Optional[int] = None):
        if k < 2:
            raise ValueError("spline order k must be at least 2")
        self.grid = grid
        self.k = k
        self.n = grid.n_intervals + k - 3
        if self.n < 1:
            raise ValueError("grid too small for this spline order")
        bk = grid.breakpoints
        self.knots = np.concatenate([np.full(k, bk[0]), bk[1:-1], np.full(k, bk[-1])])
        self.quad = gauss_rule(grid, quad_points if quad_points is not None else k)
        m = self.quad.points_per_interval
        n_int = grid.n_intervals
        self.qval = np.empty((n_int, m, k))
        self.qder = np.empty((n_int, m, k))
        for i in range(n_int):
            mu = i + k - 1
            for q in range(m):
                v, d = _values_and_derivs(self.knots, k, mu, self.quad.nodes[i, q])
                self.qval[i, q] = v
                self.qder[i, q] = d

    @property
    def r_max(self) -> float:
        return self.grid.r_max

    def find_interval(self, r: float) -> int:
        bk = self.grid.breakpoints
        if r < bk[0] or r > bk[-1]:
            raise ValueError(f"r = {r} outside [0, {bk[-1]}]")
        i = int(np.searchsorted(bk, r, side="right")) - 1
        return min(max(i, 0), self.grid.n_intervals - 1)

    def eval_raw(self, r: float) -> Tuple[int, np.ndarray, np.ndarray]:
        """(first raw index, values, first derivatives) of the k nonzero raw splines."""
        i = self.find_interval(r)
        v, d = _values_and_derivs(self.knots, self.k, i + self.k - 1, r)
        return i, v, d

    @property
    def operators(self) -> "SplineOperators":
        if not hasattr(self, "_operators"):
            self._operators = SplineOperators(self)
        return self._operators


def build_basis(r_max: float, n_splines: int, k: int = 9,
                n_geom: int = 40, g: float = 1.05,
                quad_points: Optional[int] = None) -> RadialBasis:
    """Grid plus basis in one call (the common path)."""
    return RadialBasis(build_grid(r_max, n_splines, k, n_geom, g), k,
                       quad_points=quad_points)


def eval_splines(basis: RadialBasis, r: float
                 ) -> Tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Retained spline values and first derivatives at a point.

    Returns ``(indices, values, derivatives)`` restricted to the retained
    splines that are nonzero at ``r`` (at most k of them).
    """
    first_raw, v, d = basis.eval_raw(r)
    raw = np.arange(first_raw, first_raw + basis.k)
    keep = (raw >= 1) & (raw <= basis.n)
    return raw[keep] - 1, v[keep], d[keep]


# ============================================================
# Banded Galerkin assembly
# ============================================================

@dataclass
class BandedMatrix:
    """Square matrix in general band storage ``data[p + i - j, j]``."""

    dim: int
    half_bandwidth: int
    data: np.ndarray       # (2p + 1, dim)
    symmetric: bool = False

    def toarray(self) -> np.ndarray:
        p = self.half_bandwidth
        out = np.zeros((self.dim, self.dim))
        for off in range(-p, p + 1):
            idx = np.arange(max(0, -off), min(self.dim, self.dim - off))
            out[idx + off, idx] = self.data[p + off, idx]
        return out

    @classmethod
    def from_dense(cls, mat: np.ndarray, half_bandwidth: int,
                   symmetric: bool = False, tol: float = 0.0) -> "BandedMatrix":
        """Extract band storage, rejecting entries outside the band."""
        dim = mat.shape[0]
        if mat.shape != (dim, dim):
            raise ValueError("matrix must be square")
        p = half_bandwidth
        scale = np.max(np.abs(mat)) or 1.0
        data = np.zeros((2 * p + 1, dim))
        for off in range(-p, p + 1):
            idx = np.arange(max(0, -off), min(dim, dim - off))
            data[p + off, idx] = mat[idx + off, idx]
        i, j = np.indices(mat.shape)
        outside = np.abs(mat[np.abs(i - j) > p])
        if outside.size and np.max(outside) > tol * scale:
            raise ValueError("matrix has entries outside the stated band")
        return cls(dim=dim, half_bandwidth=p, data=data, symmetric=symmetric)


def _check_kernel_singularity(basis: RadialBasis,
                              kernel_vals: np.ndarray,
                              max_singularity: float) -> None:
    """Reject kernels growing faster than r^(-max_singularity) toward r = 0.

    Probes the two innermost quadrature nodes.  Retained splines vanish
    linearly at the origin, so products tolerate 1/r (single derivative
    factors) out of the box; the centrifugal path opts in to 1/r^2.
    """
    r1 = basis.quad.nodes[0, 0]
    r2 = basis.quad.nodes[0, 1] if basis.quad.points_per_interval > 1 else basis.quad.nodes[1, 0]
    f1, f2 = abs(kernel_vals.flat[0]), abs(kernel_vals.flat[1])
    if f1 == 0.0 or f2 == 0.0:
        return
    slope = np.log(f1 / f2) / np.log(r1 / r2)
    if slope < -(max_singularity + 0.25):
        raise ValueError(f"kernel grows like r^({slope:.2f}) near r = 0; "
                         f"stronger than the permitted r^(-{max_singularity:g})")


def assemble(basis: RadialBasis,
             kernel: Optional[Callable[[np.ndarray], np.ndarray]] = None,
             deriv: Tuple[int, int] = (0, 0),
             max_singularity: float = 1.0) -> BandedMatrix:
    """Galerkin matrix ``M[i, j] = Int B_i^(d0) kernel(r) B_j^(d1) dr``.

    ``kernel = None`` means 1.  ``deriv`` selects derivative order (0 or 1)
    for the row and column factor.  Kernels more singular than 1/r are
    rejected unless ``max_singularity`` is raised explicitly (the centrifugal
    term needs 1/r^2, which spline products still integrate).
    """
    if deriv[0] not in (0, 1) or deriv[1] not in (0, 1):
        raise ValueError("only derivative orders 0 and 1 are supported")
    k, n = basis.k, basis.n
    p = k - 1
    data = np.zeros((2 * p + 1, n))

    if kernel is None:
        kvals = basis.quad.weights
    else:
        kv = np.asarray(kernel(basis.quad.nodes), dtype=float)
        if kv.shape != basis.quad.nodes.shape:
            raise ValueError("kernel must map node array to same-shape array")
        if not np.all(np.isfinite(kv)):
            raise ValueError("kernel not finite at quadrature nodes")
        _check_kernel_singularity(basis, kv, max_singularity)
        kvals = basis.quad.weights * kv

    row_tab = basis.qder if deriv[0] else basis.qval
    col_tab = basis.qder if deriv[1] else basis.qval
    for i in range(basis.grid.n_intervals):
        block = np.einsum("qa,q,qb->ab", row_tab[i], kvals[i], col_tab[i])
        for a in range(k):
            ra = i + a - 1          # retained row index
            if ra < 0 or ra >= n:
                continue
            for b in range(k):
                rb = i + b - 1
                if rb < 0 or rb >= n:
                    continue
                data[p + ra - rb, rb] += block[a, b]

    sym = deriv[0] == deriv[1]
    return BandedMatrix(dim=n, half_bandwidth=p, data=data, symmetric=sym)


class SplineOperators:
    """Lazily assembled one-body matrices shared by every consumer of a basis."""

    def __init__(self, basis: "RadialBasis"):
        self._basis = basis
        self._cache: dict = {}

    def _get(self, key, maker):
        if key not in self._cache:
            self._cache[key] = maker()
        return self._cache[key]

    @property
    def overlap(self) -> BandedMatrix:
        return self._get("overlap", lambda: assemble(self._basis))

    @property
    def radial(self) -> BandedMatrix:
        """Int B_i r B_j dr (length-form dipole weight)."""
        return self._get("radial", lambda: assemble(self._basis, kernel=lambda r: r))

    @property
    def inv_r(self) -> BandedMatrix:
        return self._get("inv_r", lambda: assemble(self._basis, kernel=lambda r: 1.0 / r))

    @property
    def inv_r2(self) -> BandedMatrix:
        """Centrifugal kernel; the stronger singularity is deliberate."""
        return self._get("inv_r2", lambda: assemble(
            self._basis, kernel=lambda r: r**-2.0, max_singularity=2.0))

    @property
    def deriv(self) -> BandedMatrix:
        """Int B_i B_j' dr (antisymmetric)."""
        return self._get("deriv", lambda: assemble(self._basis, deriv=(0, 1)))

    @property
    def stiffness(self) -> BandedMatrix:
        """Int B_i' B_j' dr."""
        return self._get("stiffness", lambda: assemble(self._basis, deriv=(1, 1)))


def interleave_dirac(pp: BandedMatrix, pq: BandedMatrix,
                     qp: BandedMatrix, qq: BandedMatrix) -> BandedMatrix:
    """Interleave four n x n spline blocks into the 2n x 2n two-component layout.

    Coefficient ordering (p_1, q_1, p_2, q_2, ...) keeps the matrix banded
    with half-bandwidth 2(k - 1) + 1.
    """
    n = pp.dim
    p_small = pp.half_bandwidth
    dense = np.zeros((2 * n, 2 * n))
    dense[0::2, 0::2] = pp.toarray()
    dense[0::2, 1::2] = pq.toarray()
    dense[1::2, 0::2] = qp.toarray()
    dense[1::2, 1::2] = qq.toarray()
    return BandedMatrix.from_dense(dense, 2 * p_small + 1, symmetric=True)
