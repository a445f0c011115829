"""Littlewood-Paley blocks, Besov and Chemin-Lerner norms, Bony paraproducts.

Profiles are built from a C-infinity step ``chi`` equal to 1 on ``|xi| <= 1/2``
and 0 on ``|xi| >= 1``:

    phi_0(xi) = chi(xi / 2) - chi(xi),   phi_j(xi) = phi_0(2^-j xi),
    psi(xi)   = chi(xi / 2).

``supp phi_j`` is ``[2^(j-1), 2^(j+1)]`` and the sums telescope, so
``psi + sum_{1..J} phi_j = chi(2^-(J+1) xi)`` and
``sum_{j0..J} phi_j = chi(2^-(J+1) xi) - chi(2^-j0 xi)`` exactly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np
from scipy.integrate import trapezoid

from . import _kernels
from .spectral import Field, Grid, apply_symbol, derivative, derivative_symbol, lp_norm, sup_norm


class ZeroBlockError(ValueError):
    """A dyadic block of the field vanishes, so a ratio is undefined."""


def _glue(t):
    out = np.zeros_like(t, dtype=float)
    pos = t > 0
    out[pos] = np.exp(-1.0 / t[pos])
    return out


def smooth_step(r) -> np.ndarray:
    """``chi(r)``: 1 for ``|r| <= 1/2``, 0 for ``|r| >= 1``, smooth in between."""
    r = np.abs(np.asarray(r, dtype=float))
    t = np.clip(2.0 * (1.0 - r), 0.0, 1.0)
    a = _glue(t)
    b = _glue(1.0 - t)
    return a / (a + b)


def phi_profile(xi, j: int) -> np.ndarray:
    r = np.abs(np.asarray(xi, dtype=float))
    return smooth_step(r * 2.0 ** (-j - 1)) - smooth_step(r * 2.0 ** (-j))


def psi_profile(xi) -> np.ndarray:
    return smooth_step(np.abs(np.asarray(xi, dtype=float)) * 0.5)


@dataclass(frozen=True)
class DyadicPartition:
    """Dyadic frequency profiles over ``j_min <= j <= j_max`` on a grid.

    Inhomogeneous blocks are ``psi, phi_1, ..., phi_{j_max}``; homogeneous
    blocks are ``phi_{j_min}, ..., phi_{j_max}``.
    """

    grid: Grid
    j_min: int
    j_max: int

    @cached_property
    def _cache(self) -> dict:
        return {}

    def phi_hat(self, j: int) -> np.ndarray:
        """``phi_j`` on the half spectrum."""
        key = ("phi", j)
        if key not in self._cache:
            self._cache[key] = phi_profile(self.grid.rxi_abs, j)
        return self._cache[key]

    @cached_property
    def psi_hat(self) -> np.ndarray:
        return psi_profile(self.grid.rxi_abs)

    @property
    def homogeneous_band(self) -> range:
        return range(self.j_min, self.j_max + 1)

    @property
    def inhomogeneous_band(self) -> range:
        return range(1, self.j_max + 1)

    def check_block(self, j: int):
        band = self.homogeneous_band
        if j not in band:
            raise ValueError(f"block {j} outside partition band [{band.start}, {band.stop - 1}]")

    def inhomogeneous_sum(self) -> np.ndarray:
        s = self.psi_hat.copy()
        for j in self.inhomogeneous_band:
            s = s + self.phi_hat(j)
        return s

    def homogeneous_sum(self) -> np.ndarray:
        s = np.zeros(self.grid.half_shape)
        for j in self.homogeneous_band:
            s = s + self.phi_hat(j)
        return s

    def identity_errors(self) -> dict:
        """Max deviation of both partition-of-unity identities on their bands."""
        r = self.grid.rxi_abs
        inh = r <= 2.0 ** (self.j_max - 1)
        hom = (r >= 2.0 ** self.j_min) & (r <= 2.0 ** (self.j_max - 1))
        e_inh = float(np.max(np.abs(self.inhomogeneous_sum()[inh] - 1.0))) if inh.any() else 0.0
        e_hom = float(np.max(np.abs(self.homogeneous_sum()[hom] - 1.0))) if hom.any() else 0.0
        return {"inhomogeneous": e_inh, "homogeneous": e_hom}


def build_partition(grid: Grid, j_min: int, j_max: int) -> DyadicPartition:
    """Partition for blocks ``j_min..j_max``; the top block must fit below Nyquist."""
    j_min, j_max = int(j_min), int(j_max)
    if j_max < j_min:
        raise ValueError(f"empty band: j_min={j_min} > j_max={j_max}")
    if 2.0 ** (j_max + 1) > grid.xi_nyquist * (1 + 1e-12):
        raise ValueError(
            f"j_max={j_max} needs |xi| up to {2.0 ** (j_max + 1)}, grid resolves {grid.xi_nyquist}"
        )
    if 2.0 ** (j_min + 1) <= grid.xi_min * (1 - 1e-12):
        raise ValueError(
            f"block j_min={j_min} lies below the lowest resolved frequency {grid.xi_min}"
        )
    return DyadicPartition(grid, j_min, j_max)


def default_partition(grid: Grid) -> DyadicPartition:
    """Widest band whose homogeneous identity covers every mode up to ``2^j_max``."""
    j_max = int(math.floor(math.log2(grid.xi_nyquist * (1 + 1e-12)))) - 1
    j_min = int(math.floor(math.log2(grid.xi_min * (1 + 1e-12))))
    return build_partition(grid, min(j_min, j_max), j_max)


# --- projections --------------------------------------------------------------


def block_project(f: Field, j: int, partition: DyadicPartition) -> Field:
    """``phi_j * f`` for ``j`` in either the homogeneous or inhomogeneous band."""
    lo = min(partition.j_min, 1)
    if not lo <= j <= partition.j_max:
        raise ValueError(f"block {j} outside partition band [{lo}, {partition.j_max}]")
    return apply_symbol(f, partition.phi_hat(j))


def low_project(f: Field, partition: DyadicPartition) -> Field:
    """``psi * f``."""
    return apply_symbol(f, partition.psi_hat)


def partial_sum_symbol(j: int, partition: DyadicPartition) -> np.ndarray:
    if j < 0:
        return np.zeros(partition.grid.half_shape)
    s = partition.psi_hat.copy()
    for k in range(1, min(j, partition.j_max) + 1):
        s = s + partition.phi_hat(k)
    return s


def partial_sum(f: Field, j: int, partition: DyadicPartition) -> Field:
    """``S_j f = psi * f + sum_{1 <= k <= j} phi_k * f`` (zero for ``j < 0``)."""
    return apply_symbol(f, partial_sum_symbol(j, partition))


def inhomogeneous_blocks(f: Field, partition: DyadicPartition) -> list:
    """``[psi * f, phi_1 * f, ..., phi_{j_max} * f]``."""
    return [low_project(f, partition)] + [
        apply_symbol(f, partition.phi_hat(j)) for j in partition.inhomogeneous_band
    ]


def block_via_convolution(f: Field, j: int, partition: DyadicPartition) -> Field:
    """``phi_j * f`` by direct physical-space circular convolution (1D oracle).

    The kernel is summed as a cosine series without any FFT and the
    convolution runs through the compiled (or numpy) O(n^2) kernel.
    """
    g = f.grid
    if g.dim != 1:
        raise ValueError("convolution oracle is 1D only")
    k = np.arange(g.n // 2 + 1)
    xi = np.pi * k / g.L
    prof = phi_profile(xi, j) if j != 0 else psi_profile(xi)
    active = np.flatnonzero(prof)
    w = np.where((k[active] == 0) | (k[active] == g.n // 2), 1.0, 2.0) * prof[active]
    offsets = g.dx * np.arange(g.n)
    kernel = np.zeros(g.n)
    for start in range(0, active.size, 256):
        sl = slice(start, start + 256)
        kernel += np.cos(np.outer(offsets, xi[active][sl])) @ w[sl]
    kernel *= g.dx / (2.0 * g.L)
    return Field(g, _kernels.circular_convolve(f.samples, kernel), f.t)


# --- norms ----------------------------------------------------------------------


@dataclass(frozen=True)
class BesovIndex:
    s: float
    p: float = math.inf
    q: float = math.inf
    homogeneous: bool = True

    def __post_init__(self):
        for name in ("p", "q"):
            v = getattr(self, name)
            if not (v >= 1):
                raise ValueError(f"{name} must lie in [1, inf], got {v}")


@dataclass(frozen=True)
class TrajectoryNormIndex:
    r: float
    T: float
    besov: BesovIndex

    def __post_init__(self):
        if not self.r >= 1:
            raise ValueError(f"time exponent r must lie in [1, inf], got {self.r}")
        if not self.T > 0:
            raise ValueError(f"horizon T must be positive, got {self.T}")


def _lq(values, q: float) -> float:
    v = np.abs(np.asarray(values, dtype=float))
    if v.size == 0:
        return 0.0
    if math.isinf(q):
        return float(v.max())
    return float(np.sum(v ** q) ** (1.0 / q))


def _block_lp(f: Field, symbol: np.ndarray, p: float, refined: bool) -> float:
    b = apply_symbol(f, symbol)
    if refined and math.isinf(p):
        return sup_norm(b)
    return lp_norm(b, p)


def block_norms(f: Field, partition: DyadicPartition, p: float = math.inf,
                homogeneous: bool = True, refined: bool = False) -> tuple:
    """Return ``(js, norms)``; inhomogeneous lists use ``j = 0`` for ``psi``."""
    if homogeneous:
        js = list(partition.homogeneous_band)
        syms = [partition.phi_hat(j) for j in js]
    else:
        js = [0] + list(partition.inhomogeneous_band)
        syms = [partition.psi_hat] + [partition.phi_hat(j) for j in js[1:]]
    return js, np.array([_block_lp(f, s, p, refined) for s in syms])


def besov_norm(f: Field, idx: BesovIndex, partition: DyadicPartition, refined: bool = False) -> float:
    """Besov norm over the resolved band, evaluated directly from the definition."""
    if partition.grid != f.grid:
        raise ValueError("partition was built for a different grid")
    js, norms = block_norms(f, partition, idx.p, idx.homogeneous, refined)
    js = np.array(js)
    if idx.homogeneous:
        return _lq(2.0 ** (idx.s * js) * norms, idx.q)
    return float(norms[0] + _lq(2.0 ** (idx.s * js[1:]) * norms[1:], idx.q))


def tail_indicator(f: Field, partition: DyadicPartition) -> float:
    """Relative L^2 mass the homogeneous band misses: ``||(1 - sum phi_j) f|| / ||f||``."""
    c = f.rspectral
    w = f.grid.rweights
    e = w * np.abs(c) ** 2
    tot = e.sum()
    if tot == 0:
        return 0.0
    miss = (1.0 - partition.homogeneous_sum()) ** 2
    return float(np.sqrt(np.sum(e * miss) / tot))


def besov_report_rows(f: Field, idx: BesovIndex, partition: DyadicPartition) -> list:
    """CSV-ready rows ``(time, j, block_Lp, besov_s_p_q, tail_indicator)``."""
    js, norms = block_norms(f, partition, idx.p, idx.homogeneous)
    total = besov_norm(f, idx, partition)
    tail = tail_indicator(f, partition)
    return [(f.t, int(j), float(v), total, tail) for j, v in zip(js, norms)]


# --- Chemin-Lerner ------------------------------------------------------------


@dataclass
class BlockNormTable:
    """Per-snapshot block norms of a trajectory."""

    times: np.ndarray
    js: np.ndarray
    norms: np.ndarray  # shape (n_times, n_blocks)
    homogeneous: bool


def block_norm_table(fields, partition: DyadicPartition, p: float = math.inf,
                     homogeneous: bool = True, refined: bool = False) -> BlockNormTable:
    times, rows, js = [], [], None
    for f in fields:
        js, norms = block_norms(f, partition, p, homogeneous, refined)
        times.append(f.t)
        rows.append(norms)
    return BlockNormTable(np.array(times), np.array(js), np.array(rows), homogeneous)


def _time_norm(times, values, r: float, T: float) -> float:
    times = np.asarray(times, dtype=float)
    values = np.abs(np.asarray(values, dtype=float))
    if T > times[-1] * (1 + 1e-12) + 1e-14:
        raise ValueError(f"horizon T={T} exceeds trajectory end {times[-1]}")
    keep = times <= T
    t = times[keep]
    v = values[keep]
    if t[-1] < T:
        vT = np.interp(T, times, values)
        t = np.append(t, T)
        v = np.append(v, vT)
    if math.isinf(r):
        return float(v.max())
    if t.size < 2:
        return 0.0
    return float(trapezoid(v ** r, t) ** (1.0 / r))


def chemin_lerner_from_table(table: BlockNormTable, tidx: TrajectoryNormIndex) -> float:
    b = tidx.besov
    if b.homogeneous != table.homogeneous:
        raise ValueError("table and index disagree on homogeneity")
    tn = np.array([_time_norm(table.times, table.norms[:, i], tidx.r, tidx.T)
                   for i in range(table.js.size)])
    w = 2.0 ** (b.s * table.js.astype(float))
    if b.homogeneous:
        return _lq(w * tn, b.q)
    return float(tn[0] + _lq(w[1:] * tn[1:], b.q))


def chemin_lerner_norm(traj, tidx: TrajectoryNormIndex, partition: DyadicPartition) -> float:
    """``||u||`` in the time-inside-frequency-sum space over ``[0, T]``."""
    b = tidx.besov
    table = block_norm_table(traj.fields, partition, b.p, b.homogeneous)
    return chemin_lerner_from_table(table, tidx)


def chemin_lerner_convergence(traj, tidx: TrajectoryNormIndex, partition: DyadicPartition) -> float:
    """Relative change of the norm when every other snapshot is dropped."""
    b = tidx.besov
    table = block_norm_table(traj.fields, partition, b.p, b.homogeneous)
    full = chemin_lerner_from_table(table, tidx)
    sub = BlockNormTable(table.times[::2], table.js, table.norms[::2], table.homogeneous)
    if sub.times[-1] < tidx.T:
        sub = BlockNormTable(np.append(sub.times, table.times[-1]), table.js,
                             np.vstack([sub.norms, table.norms[-1:]]), table.homogeneous)
    half = chemin_lerner_from_table(sub, tidx)
    return abs(full - half) / full if full else 0.0


def interpolation_check(traj, partition: DyadicPartition, T: float | None = None,
                        homogeneous: bool = False) -> dict:
    """Compare ``||u||_{L~2 B^1/2}`` with the geometric mean of the L~inf B^0 and L~1 B^1 norms.

    All three norms use ``p = q = inf``; every block satisfies the bound by
    Cauchy-Schwarz in time, so ``holds`` failing signals a broken norm table.
    """
    table = block_norm_table(traj.fields, partition, math.inf, homogeneous)
    T = float(table.times[-1]) if T is None else T

    def norm(r, s):
        return chemin_lerner_from_table(
            table, TrajectoryNormIndex(r, T, BesovIndex(s, math.inf, math.inf, homogeneous)))

    lhs = norm(2, 0.5)
    rhs = math.sqrt(norm(math.inf, 0.0) * norm(1, 1.0))
    return {"lhs": lhs, "rhs": rhs, "holds": lhs <= rhs * (1 + 1e-12) + 1e-300}


# --- Bernstein and Bony ----------------------------------------------------------


def bernstein_ratio(f: Field, j: int, partition: DyadicPartition) -> float:
    """``||d_x (phi_j f)||_inf / (2^j ||phi_j f||_inf)`` with refined suprema."""
    if f.grid.dim != 1:
        raise ValueError("bernstein_ratio is defined for 1D fields")
    partition.check_block(j)
    b = apply_symbol(f, partition.phi_hat(j))
    denom = sup_norm(b)
    if denom <= 1e-300 or denom <= 1e-14 * max(sup_norm(f), 1e-300):
        raise ZeroBlockError(f"block {j} is zero")
    return sup_norm(derivative(b)) / (2.0 ** j * denom)


@dataclass
class BonyParts:
    T_lowhigh: Field
    T_highlow: Field
    R: Field

    def total(self) -> Field:
        return self.T_lowhigh + self.T_highlow + self.R


def bony_decompose(u: Field, v: Field | None, partition: DyadicPartition) -> BonyParts:
    """Split ``u d_x v`` into low-high, high-low and resonant paraproducts.

    Blocks are ``phi_0 = psi, phi_1, ..., phi_J``. With ``v`` omitted (or
    ``v is u``) the resonant part takes the symmetric form
    ``1/2 d_x sum_{|l-k| <= 2} (phi_k u)(phi_l u)``.
    """
    if v is None:
        v = u
    if u.grid != v.grid or u.grid != partition.grid:
        raise ValueError("u, v and partition must share a grid")
    if u.grid.dim != 1:
        raise ValueError("paraproducts are implemented for 1D fields")
    g = u.grid
    U = [b.samples for b in inhomogeneous_blocks(u, partition)]
    dsym = derivative_symbol(g)
    V = [apply_symbol(b, dsym).samples for b in inhomogeneous_blocks(v, partition)]
    J = len(U) - 1
    low = np.cumsum(U, axis=0)  # low[m] = S_m u
    zero = np.zeros(g.shape)
    t_lh = zero.copy()
    t_hl = zero.copy()
    for l in range(J + 1):
        if l - 3 >= 0:
            t_lh += low[l - 3] * V[l]
        if l + 3 <= J:
            high = np.sum(U[l + 3:], axis=0)
            t_hl += high * V[l]
    if v is u:
        res = zero.copy()
        for k in range(J + 1):
            for l in range(max(0, k - 2), min(J, k + 2) + 1):
                res += U[k] * U[l]
        R = apply_symbol(Field(g, 0.5 * res), dsym)
    else:
        res = zero.copy()
        for k in range(J + 1):
            for l in range(max(0, k - 2), min(J, k + 2) + 1):
                res += U[k] * V[l]
        R = Field(g, res)
    return BonyParts(Field(g, t_lh, u.t), Field(g, t_hl, u.t), R)
