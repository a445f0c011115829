"""1D fractal Burgers equation ``u_t + Lambda^gamma u + u u_x = 0`` on the torus."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .evolution import BlowupHalt, Model, SolverConfig, evolve
from .integrator import IFRK4
from .kernels import block_semigroup_bounds
from .lp import (
    BesovIndex,
    BlockNormTable,
    DyadicPartition,
    TrajectoryNormIndex,
    ZeroBlockError,
    block_norm_table,
    chemin_lerner_from_table,
    default_partition,
    partial_sum_symbol,
)
from .spectral import Field, Grid, _irfftn, _rfftn, derivative_symbol, sup_norm
from .trajectory import Trajectory

__all__ = [
    "BlowupHalt",
    "BurgersModel",
    "PicardReport",
    "SolverConfig",
    "energy_identity_check",
    "freq_max_principle_check",
    "picard_iterate",
    "rhs",
    "solve",
    "step",
]


class BurgersModel(Model):
    def __init__(self, config: SolverConfig):
        if config.grid.dim != 1:
            raise ValueError("Burgers solver is 1D")
        super().__init__(config)
        self.dsym = derivative_symbol(self.grid, 0, 1)
        self.flux_sym = -0.5 * self.dsym
        if self.mask is not None:
            self.flux_sym = np.where(self.mask, self.flux_sym, 0.0)
        self.last_linf = 0.0

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        u = _irfftn(v, self.grid)
        m = float(np.max(np.abs(u)))
        self.last_speed = m
        self.last_linf = m
        return self.flux_sym * _rfftn(u * u)

    def speed(self, v: np.ndarray) -> float:
        return float(np.max(np.abs(_irfftn(v, self.grid))))

    def gradient_max(self, v: np.ndarray) -> float:
        return float(np.max(np.abs(_irfftn(self.dsym * v, self.grid))))


def _config_for(grid: Grid, gamma: float, dealias: bool, nonlinear: bool) -> SolverConfig:
    return SolverConfig(grid=grid, T_final=1.0, gamma=gamma, dealias=dealias, nonlinear=nonlinear)


def rhs(u: Field, gamma: float = 1.0, nonlinear: bool = True, dealias: bool = True) -> Field:
    """``-Lambda^gamma u - (1/2) d_x (u^2)`` with the square dealiased."""
    model = BurgersModel(_config_for(u.grid, gamma, dealias, nonlinear))
    v = u.rspectral
    out = -model.symbol * v
    if nonlinear:
        out = out + model.nonlinear(v)
    return Field(u.grid, _irfftn(out, u.grid), u.t)


def step(u: Field, dt: float, config: SolverConfig) -> Field:
    """One integrating-factor RK4 step of size ``dt``."""
    if not dt > 0:
        raise ValueError("dt must be positive")
    model = BurgersModel(config)
    stepper = IFRK4(model.symbol, model.nonlinear, enabled=config.nonlinear)
    v = stepper.step(u.rspectral, dt)
    if not np.all(np.isfinite(v)):
        raise FloatingPointError("step produced non-finite values")
    return Field(u.grid, _irfftn(v, u.grid), u.t + dt)


def solve(u0: Field, config: SolverConfig) -> Trajectory:
    """Integrate to ``config.T_final``; raises :class:`BlowupHalt` if a monitor trips."""
    traj = evolve(BurgersModel(config), u0, config, label="burgers")
    traj.meta["gamma"] = config.gamma
    traj.meta["nonlinear"] = config.nonlinear
    return traj


# --- monitors -------------------------------------------------------------------


def energy_identity_check(traj: Trajectory) -> dict:
    """Residual ``||u(t)||_2^2 + 2 int_0^t ||Lambda^(gamma/2) u||_2^2 - ||u_0||_2^2``."""
    t = traj.column("t")
    l2 = traj.column("l2")
    diss = traj.column("dissipation_integral")
    e0 = l2[0] ** 2
    r = l2 ** 2 + 2.0 * diss - e0
    rel = np.abs(r) / e0 if e0 > 0 else np.abs(r)
    return {"t": t, "residual": r, "relative": rel, "max_relative": float(rel.max()) if rel.size else 0.0}


@dataclass
class FmpReport:
    c: float
    js: list
    max_violation: float  # largest (lhs - rhs), negative when every step holds
    violations: int
    tolerance: float
    per_block: dict = field(default_factory=dict)

    @property
    def holds(self) -> bool:
        return self.violations == 0


def _forcing_block_sup(u: Field, sym: np.ndarray, flux: np.ndarray) -> float:
    f = Field(u.grid, _irfftn(sym * flux * _rfftn(u.samples ** 2), u.grid))
    return sup_norm(f)


def fit_fmp_constant(traj: Trajectory, partition: DyadicPartition, js=None) -> float:
    """Smallest measured semigroup exponent over the blocks and snapshot steps of ``traj``."""
    js = list(partition.homogeneous_band) if js is None else list(js)
    snaps = traj.snapshots
    best = math.inf
    for k in range(len(snaps) - 1):
        h = snaps[k + 1].t - snaps[k].t
        for j in js:
            try:
                d = block_semigroup_bounds(snaps[k], j, h, partition)
            except ZeroBlockError:
                continue
            best = min(best, d.exponent)
    return best


def freq_max_principle_check(traj: Trajectory, j=None, partition: DyadicPartition | None = None,
                             c: float | None = None, tol: float = 1e-6, dealias: bool = True) -> FmpReport:
    """Check ``||phi_j u(t+h)|| <= e^{-c 2^j h} ||phi_j u(t)|| + int_t^{t+h} ||phi_j f||``.

    ``f = -(1/2) d_x(u^2)``; the time integral uses the trapezoid rule over
    consecutive snapshots. ``j`` may be one block, a list, or ``None`` for the
    entire homogeneous band. ``tol`` is relative to ``||u_0||_inf``.
    """
    grid = traj.grid
    partition = default_partition(grid) if partition is None else partition
    if j is None:
        js = list(partition.homogeneous_band)
    elif np.ndim(j) == 0:
        js = [int(j)]
    else:
        js = [int(x) for x in j]
    if c is None:
        c = fit_fmp_constant(traj, partition, js)
    snaps = traj.snapshots
    flux = -0.5 * derivative_symbol(grid, 0, 1)
    if dealias:
        flux = np.where(grid.dealias_mask(half=True), flux, 0.0)
    nonlinear = traj.meta.get("nonlinear", True)
    scale = sup_norm(snaps[0]) or 1.0
    atol = tol * scale
    worst = -math.inf
    count = 0
    per_block = {}
    for jj in js:
        sym = partition.phi_hat(jj)
        norms = [sup_norm(Field(grid, _irfftn(sym * s.rspectral, grid))) for s in snaps]
        forcing = [_forcing_block_sup(s, sym, flux) if nonlinear else 0.0 for s in snaps]
        w_j = -math.inf
        for k in range(len(snaps) - 1):
            h = snaps[k + 1].t - snaps[k].t
            rhs_ = math.exp(-c * 2.0 ** jj * h) * norms[k] + 0.5 * h * (forcing[k] + forcing[k + 1])
            margin = norms[k + 1] - rhs_
            w_j = max(w_j, margin)
            if margin > atol:
                count += 1
        per_block[jj] = w_j
        worst = max(worst, w_j)
    return FmpReport(float(c), js, float(worst), count, atol, per_block)


# --- Duhamel-Picard construction --------------------------------------------------


def _phi_weights(lam: np.ndarray, h: float) -> tuple:
    """Weights ``(a, b)`` with ``int_0^h e^{-lam s} [(s/h) N_0 + (1 - s/h) N_1] ds = a N_0 + b N_1``."""
    z = lam * h
    small = z < 1e-3
    zs = np.where(small, 1.0, z)
    em = np.exp(-zs)
    a = np.where(small, h * (0.5 - z / 3.0 + z * z / 8.0), h * (1.0 - em * (1.0 + zs)) / (zs * zs))
    total = np.where(small, h * (1.0 - z / 2.0 + z * z / 6.0 - z ** 3 / 24.0), h * (1.0 - em) / zs)
    return a, total - a


@dataclass
class PicardReport:
    iterates: list  # list of Trajectory, iterate n at index n - 1
    differences: list  # ||u_{n+1} - u_n|| for n = 1 .. n_max - 1
    ratios: list  # differences[n-1] / differences[n-2] for n >= 2
    delta: float
    T: float
    contracting: bool

    def summary_rows(self) -> list:
        rows = []
        for i, d in enumerate(self.differences):
            n = i + 1
            r = self.ratios[i - 1] if i >= 1 else float("nan")
            rows.append((n, d, r))
        return rows


def _trajectory_norm_table(fields, partition) -> BlockNormTable:
    return block_norm_table(fields, partition, math.inf, homogeneous=False)


def picard_iterate(u0: Field, n_max: int, T: float, config: SolverConfig | None = None,
                   delta: float = 0.25, steps: int = 256) -> PicardReport:
    """Iterates ``u_{n+1} = e^{-t Lambda} S_{n+1} u_0 - (1/2) int e^{-(t-s) Lambda} d_x u_n^2 ds``.

    ``u_0 = 0``, so ``u_1 = e^{-t Lambda} S_1 u_0``. The time integral uses
    product integration on the uniform grid ``t_m = m T / steps``: the
    nonlinearity is interpolated linearly between nodes and the semigroup is
    integrated exactly. Differences are measured in the inhomogeneous
    Chemin-Lerner norm with ``r = 2``, ``s = -delta``, ``p = q = inf``.
    """
    if not 0 < delta < 0.5:
        raise ValueError("delta must lie in (0, 1/2)")
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    grid = u0.grid
    gamma = 1.0 if config is None else config.gamma
    dealias = True if config is None else config.dealias
    partition = default_partition(grid)
    lam = grid.rxi_abs ** gamma
    h = T / steps
    times = np.arange(steps + 1) * h
    E = np.exp(-lam * h)
    wa, wb = _phi_weights(lam, h)
    flux = -0.5 * derivative_symbol(grid, 0, 1)
    if dealias:
        flux = np.where(grid.dealias_mask(half=True), flux, 0.0)
    v0 = u0.rspectral
    prev = None  # half spectra of u_n at the time nodes
    iterates = []
    tidx = TrajectoryNormIndex(2, T, BesovIndex(-delta, math.inf, math.inf, homogeneous=False))
    differences = []
    prev_fields = None
    for n in range(1, n_max + 1):
        data = partial_sum_symbol(n, partition) * v0
        cur = np.empty((steps + 1,) + grid.half_shape, dtype=complex)
        lin = data.copy()
        acc = np.zeros(grid.half_shape, dtype=complex)
        Nprev = None
        if prev is not None:
            Nprev = flux * _rfftn(_irfftn(prev[0], grid) ** 2)
        cur[0] = data
        for m in range(1, steps + 1):
            lin = E * lin
            if prev is not None:
                Nm = flux * _rfftn(_irfftn(prev[m], grid) ** 2)
                acc = E * acc + wa * Nprev + wb * Nm
                Nprev = Nm
            cur[m] = lin + acc
        fields = [Field(grid, _irfftn(cur[m], grid), float(times[m])) for m in range(steps + 1)]
        tr = Trajectory(grid, gamma, snapshots=fields, meta={"picard_index": n})
        iterates.append(tr)
        if prev_fields is not None:
            diff = [Field(grid, a.samples - b.samples, a.t) for a, b in zip(fields, prev_fields)]
            differences.append(chemin_lerner_from_table(_trajectory_norm_table(diff, partition), tidx))
        prev = cur
        prev_fields = fields
    ratios = [differences[i] / differences[i - 1] if differences[i - 1] > 0 else 0.0
              for i in range(1, len(differences))]
    contracting = all(r < 1 for r in ratios)
    return PicardReport(iterates, differences, ratios, delta, T, contracting)


def trajectory_distance(a: list, b: list, T: float, delta: float = 0.25, relative: bool = True) -> float:
    """Inhomogeneous ``L~2(0,T; B^{-delta}_{inf,inf})`` distance of two aligned snapshot lists."""
    grid = a[0].grid
    partition = default_partition(grid)
    tidx = TrajectoryNormIndex(2, T, BesovIndex(-delta, math.inf, math.inf, homogeneous=False))
    diff = [Field(grid, x.samples - y.samples, x.t) for x, y in zip(a, b)]
    d = chemin_lerner_from_table(_trajectory_norm_table(diff, partition), tidx)
    if not relative:
        return d
    ref = chemin_lerner_from_table(_trajectory_norm_table(list(b), partition), tidx)
    return d / ref if ref > 0 else d
