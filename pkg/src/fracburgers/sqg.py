"""2D dissipative surface quasi-geostrophic equation.

``theta_t + Lambda^gamma theta + u . grad theta = 0`` with velocity
``u = (-R_2 theta, R_1 theta)`` and Riesz transforms ``R_k = -i xi_k / |xi|``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import Model, SolverConfig, evolve
from .integrator import IFRK4
from .spectral import Field, Grid, _irfftn, _rfftn, derivative_symbol
from .trajectory import Trajectory


def riesz_symbol(grid: Grid, axis: int) -> np.ndarray:
    """Half-spectrum symbol of ``R_axis``; zero at ``xi = 0`` and on the axis Nyquist line."""
    if grid.dim != 2:
        raise ValueError("Riesz velocity needs a 2D grid")
    xi = np.broadcast_to(grid.rxi[axis], grid.half_shape)
    r = grid.rxi_abs
    with np.errstate(invalid="ignore", divide="ignore"):
        sym = np.where(r > 0, -1j * xi / np.where(r > 0, r, 1.0), 0.0)
    nyq = np.isclose(np.abs(xi), grid.xi_nyquist)
    return np.where(nyq, 0.0, sym)


def _velocity_symbols(grid: Grid) -> tuple:
    return -riesz_symbol(grid, 1), riesz_symbol(grid, 0)


def riesz_velocity(theta: Field) -> tuple:
    """``(u1, u2) = (-R_2 theta, R_1 theta)``."""
    s1, s2 = _velocity_symbols(theta.grid)
    c = theta.rspectral
    g = theta.grid
    return Field(g, _irfftn(s1 * c, g), theta.t), Field(g, _irfftn(s2 * c, g), theta.t)


def divergence(u1: Field, u2: Field) -> Field:
    g = u1.grid
    c = derivative_symbol(g, 0, 1) * u1.rspectral + derivative_symbol(g, 1, 1) * u2.rspectral
    return Field(g, _irfftn(c, g), u1.t)


@dataclass(frozen=True)
class SqgState:
    theta: Field

    @property
    def velocity(self) -> tuple:
        return riesz_velocity(self.theta)

    def divergence_error(self) -> float:
        u1, u2 = self.velocity
        d = np.max(np.abs(divergence(u1, u2).samples))
        scale = max(np.max(np.abs(u1.samples)), np.max(np.abs(u2.samples)))
        return float(d / scale) if scale > 0 else 0.0


class SqgModel(Model):
    def __init__(self, config: SolverConfig):
        if config.grid.dim != 2:
            raise ValueError("SQG solver is 2D")
        super().__init__(config)
        g = self.grid
        self.s1, self.s2 = _velocity_symbols(g)
        self.d1 = derivative_symbol(g, 0, 1)
        self.d2 = derivative_symbol(g, 1, 1)
        self.f1 = -self._masked(self.d1)
        self.f2 = -self._masked(self.d2)
        self.last_linf = 0.0

    def nonlinear(self, v: np.ndarray) -> np.ndarray:
        g = self.grid
        th = _irfftn(v, g)
        u1 = _irfftn(self.s1 * v, g)
        u2 = _irfftn(self.s2 * v, g)
        self.last_linf = float(np.max(np.abs(th)))
        self.last_speed = float(np.sqrt(np.max(u1 * u1 + u2 * u2)))
        return self.f1 * _rfftn(u1 * th) + self.f2 * _rfftn(u2 * th)

    def speed(self, v: np.ndarray) -> float:
        g = self.grid
        u1 = _irfftn(self.s1 * v, g)
        u2 = _irfftn(self.s2 * v, g)
        return float(np.sqrt(np.max(u1 * u1 + u2 * u2)))

    def gradient_max(self, v: np.ndarray) -> float:
        g = self.grid
        a = _irfftn(self.d1 * v, g)
        b = _irfftn(self.d2 * v, g)
        return float(np.sqrt(np.max(a * a + b * b)))


def sqg_rhs(theta: Field, gamma: float = 1.0, nonlinear: bool = True, dealias: bool = True) -> Field:
    """``-Lambda^gamma theta - div(u theta)``."""
    cfg = SolverConfig(grid=theta.grid, T_final=1.0, gamma=gamma, dealias=dealias, nonlinear=nonlinear)
    model = SqgModel(cfg)
    v = theta.rspectral
    out = -model.symbol * v
    if nonlinear:
        out = out + model.nonlinear(v)
    return Field(theta.grid, _irfftn(out, theta.grid), theta.t)


def sqg_step(theta: Field, dt: float, config: SolverConfig) -> Field:
    if not dt > 0:
        raise ValueError("dt must be positive")
    model = SqgModel(config)
    stepper = IFRK4(model.symbol, model.nonlinear, enabled=config.nonlinear)
    v = stepper.step(theta.rspectral, dt)
    if not np.all(np.isfinite(v)):
        raise FloatingPointError("step produced non-finite values")
    return Field(theta.grid, _irfftn(v, theta.grid), theta.t + dt)


def sqg_solve(theta0: Field, config: SolverConfig) -> Trajectory:
    traj = evolve(SqgModel(config), theta0, config, label="sqg")
    traj.meta["gamma"] = config.gamma
    traj.meta["nonlinear"] = config.nonlinear
    return traj
