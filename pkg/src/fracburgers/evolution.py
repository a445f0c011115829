"""Shared time-stepping driver: CFL control, event scheduling, monitors and halts."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .integrator import IFRK4
from .lp import BesovIndex, besov_norm, default_partition
from .spectral import Field, Grid, _irfftn, sup_norm
from .trajectory import Trajectory


class BlowupHalt(RuntimeError):
    """Raised when a monitor stops a run; carries the partial trajectory."""

    def __init__(self, trajectory: Trajectory):
        h = trajectory.halt
        super().__init__(f"run halted at t={h['t']:.6g}: {h['reason']} ({h['value']:.4g} > {h['threshold']:.4g})")
        self.trajectory = trajectory


@dataclass(frozen=True)
class SolverConfig:
    grid: Grid
    T_final: float
    gamma: float = 1.0
    dt: float | None = None  # fixed step; None selects the CFL rule
    cfl_safety: float = 0.5
    snapshot_times: tuple = ()
    diag_interval: float | None = None  # default T_final / 100
    dealias: bool = True
    nonlinear: bool = True
    linf_halt_factor: float = 10.0
    gradient_halt: bool | None = None  # None: enabled for gamma < 1
    gradient_halt_factor: float = 100.0
    besov_diagnostics: bool = True
    refined_sup: bool = True
    max_steps: int = 50_000_000

    def __post_init__(self):
        if not self.T_final > 0:
            raise ValueError(f"T_final must be positive, got {self.T_final}")
        if not 0 < self.gamma <= 2:
            raise ValueError(f"gamma must lie in (0, 2], got {self.gamma}")
        if self.dt is not None and not self.dt > 0:
            raise ValueError(f"fixed dt must be positive, got {self.dt}")
        if not 0 < self.cfl_safety <= 1:
            raise ValueError(f"cfl_safety must lie in (0, 1], got {self.cfl_safety}")
        ts = tuple(float(t) for t in self.snapshot_times)
        if any(t <= 0 or t > self.T_final * (1 + 1e-12) for t in ts):
            raise ValueError("snapshot times must lie in (0, T_final]")
        object.__setattr__(self, "snapshot_times", tuple(sorted(set(ts))))

    @property
    def gradient_monitor(self) -> bool:
        return self.gamma < 1 if self.gradient_halt is None else bool(self.gradient_halt)

    def cfl_dt(self, speed: float) -> float:
        if self.dt is not None:
            return self.dt
        h = self.cfl_safety * self.grid.dx / max(1.0, speed)
        if self.gamma > 1:
            # explicit nonlinearity next to a stiffer symbol: keep |xi|^(gamma-1) h bounded
            h = min(h, 0.5 / self.grid.xi_nyquist ** (self.gamma - 1))
        return h

    def event_times(self) -> np.ndarray:
        di = self.diag_interval if self.diag_interval else self.T_final / 100.0
        k = int(math.floor(self.T_final / di + 1e-9))
        ev = sorted(set(np.arange(1, k + 1) * di) | set(self.snapshot_times) | {self.T_final})
        merged = []
        eps = 1e-9 * self.T_final
        for t in ev:
            t = min(t, self.T_final)
            if t <= eps:
                continue
            if merged and t - merged[-1] <= eps:
                merged[-1] = t  # near-coincident events collapse onto the later one
            else:
                merged.append(t)
        return np.array(merged)


class Model:
    """Equation-specific pieces the driver needs. Subclasses fill them in."""

    def __init__(self, config: SolverConfig):
        self.config = config
        self.grid = config.grid
        self.symbol = self.grid.rxi_abs ** config.gamma
        self.mask = self.grid.dealias_mask(half=True) if config.dealias else None
        self.last_speed = 0.0

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def speed(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def gradient_max(self, v: np.ndarray) -> float:
        raise NotImplementedError

    def _masked(self, c: np.ndarray) -> np.ndarray:
        if self.mask is None:
            return c
        return np.where(self.mask, c, 0.0)


def _energy(grid: Grid, v: np.ndarray, weight: np.ndarray) -> float:
    return float(np.sum(grid.rweights * weight * (v.real ** 2 + v.imag ** 2)) * grid.cell / grid.n ** grid.dim)


def _energy_rate(grid: Grid, v: np.ndarray, vt: np.ndarray, weight: np.ndarray) -> float:
    z = np.conj(v) * vt
    return float(2.0 * np.sum(grid.rweights * weight * z.real) * grid.cell / grid.n ** grid.dim)


def evolve(model: Model, u0: Field, config: SolverConfig, label: str = "") -> Trajectory:
    grid = config.grid
    if u0.grid != grid:
        raise ValueError("initial data lives on a different grid than the config")
    stepper = IFRK4(model.symbol, model.nonlinear, enabled=config.nonlinear)
    partition = default_partition(grid) if config.besov_diagnostics else None
    w_diss = model.symbol

    traj = Trajectory(grid, config.gamma, meta={"equation": label})
    v = u0.rspectral.copy()
    t = 0.0
    diss_int = 0.0
    energy_int = 0.0

    def physical(vv, tt):
        return Field(grid, _irfftn(vv, grid), tt)

    def rate(vv, nn):
        return stepper.rate(vv, nn)

    def record(vv, tt, h, f=None):
        f = physical(vv, tt) if f is None else f
        a = np.abs(f.samples)
        row = {
            "t": tt,
            "mass": float(vv.flat[0].real * grid.cell),
            "l1": float(a.sum() * grid.cell),
            "l2": math.sqrt(_energy(grid, vv, 1.0)),
            "linf": sup_norm(f) if config.refined_sup else float(a.max()),
            "dissipation": _energy(grid, vv, w_diss),
            "dissipation_integral": diss_int,
            "energy_integral": energy_int,
            "grad_inf": model.gradient_max(vv),
            "dt": h,
        }
        if partition is not None:
            row["b0_inf1"] = besov_norm(f, BesovIndex(0.0, math.inf, 1.0), partition)
            row["b1_inf1"] = besov_norm(f, BesovIndex(1.0, math.inf, 1.0), partition)
        traj.add_diagnostics(row)
        return f

    f0 = record(v, 0.0, 0.0, Field(grid, u0.samples, 0.0))
    traj.add_snapshot(f0)

    linf0 = float(np.max(np.abs(u0.samples)))
    grad0 = model.gradient_max(v) if config.gradient_monitor else 0.0
    snaps = set(config.snapshot_times)
    events = config.event_times()

    k1 = model.nonlinear(v) if config.nonlinear else None
    speed = model.last_speed if config.nonlinear else model.speed(v)
    D0 = _energy(grid, v, w_diss)
    r0 = rate(v, k1)
    dD0 = _energy_rate(grid, v, r0, w_diss)
    E0, dE0 = _energy(grid, v, 1.0), _energy_rate(grid, v, r0, 1.0)
    steps = 0
    h = 0.0
    for t_next in events:
        while t < t_next:
            target = config.cfl_dt(speed)
            nsub = max(1, int(math.ceil((t_next - t) / target - 1e-9)))
            h = (t_next - t) / nsub
            v = stepper.step(v, h, k1)
            t = t_next if nsub == 1 else t + h
            steps += 1
            if not np.all(np.isfinite(v)):
                traj.halt = {"reason": "non-finite values", "t": t, "value": math.inf, "threshold": 0.0}
                raise BlowupHalt(traj)
            k1 = model.nonlinear(v) if config.nonlinear else None
            speed = model.last_speed if config.nonlinear else model.speed(v)
            D1 = _energy(grid, v, w_diss)
            r1 = rate(v, k1)
            dD1 = _energy_rate(grid, v, r1, w_diss)
            E1, dE1 = _energy(grid, v, 1.0), _energy_rate(grid, v, r1, 1.0)
            # end-corrected trapezoid: exact for cubics, uses the known time derivatives
            diss_int += 0.5 * h * (D0 + D1) - h * h / 12.0 * (dD1 - dD0)
            energy_int += 0.5 * h * (E0 + E1) - h * h / 12.0 * (dE1 - dE0)
            D0, dD0, E0, dE0 = D1, dD1, E1, dE1
            halt = _check_halts(model, config, v, t, linf0, grad0)
            if halt is None and steps >= config.max_steps:
                halt = {"reason": "step limit", "t": t, "value": float(steps), "threshold": float(config.max_steps)}
            if halt is not None:
                traj.halt = halt
                f = record(v, t, h) if t > traj.diagnostics[-1]["t"] else physical(v, t)
                if t > traj.snapshots[-1].t:
                    traj.add_snapshot(f)
                traj.meta["steps"] = steps
                raise BlowupHalt(traj)
        f = record(v, t, h)
        if any(abs(t - s) <= 1e-9 * max(1.0, s) for s in snaps) or t_next == events[-1]:
            traj.add_snapshot(f)
    traj.meta["steps"] = steps
    return traj


def _check_halts(model: Model, config: SolverConfig, v, t, linf0, grad0):
    linf = model.last_linf if config.nonlinear else float(np.max(np.abs(_irfftn(v, config.grid))))
    if linf0 > 0 and linf > config.linf_halt_factor * linf0:
        return {"reason": "sup norm growth", "t": t, "value": linf, "threshold": config.linf_halt_factor * linf0}
    if config.gradient_monitor and grad0 > 0:
        g = model.gradient_max(v)
        if g > config.gradient_halt_factor * grad0:
            return {"reason": "gradient growth", "t": t, "value": g, "threshold": config.gradient_halt_factor * grad0}
    return None
