import math

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from fracburgers import burgers as B
from fracburgers.evolution import BlowupHalt, SolverConfig
from fracburgers.generators import gaussian, sine
from fracburgers.integrator import IFRK4
from fracburgers.kernels import poisson_semigroup
from fracburgers.spectral import Field, Grid, integral, lp_norm, zeros


def test_ifrk4_scalar_order():
    # v' = -a v + b v^2 has v(t) = a v0 / (b v0 + (a - b v0) e^{a t})
    a, b, v0, T = 3.0, 1.0, 0.5, 1.0
    exact = a * v0 / (b * v0 + (a - b * v0) * math.exp(a * T))
    errs = []
    for nsteps in (10, 20, 40):
        ig = IFRK4(np.array([a]), lambda v: b * v * v)
        v = np.array([v0], dtype=complex)
        for _ in range(nsteps):
            v = ig.step(v, T / nsteps)
        errs.append(abs(v[0].real - exact))
    assert math.log2(errs[0] / errs[1]) > 3.7
    assert math.log2(errs[1] / errs[2]) > 3.7


def test_ifrk4_linear_is_exact():
    ig = IFRK4(np.array([2.0, 5.0]), None, enabled=False)
    v = ig.step(np.array([1.0, 1.0]), 0.3)
    assert np.allclose(v, np.exp(-np.array([2.0, 5.0]) * 0.3), rtol=1e-15)


def test_rhs_of_zero_and_linear_rhs():
    g = Grid(64, math.pi)
    assert np.all(B.rhs(zeros(g)).samples == 0)
    f = Field(g, np.cos(3 * g.x))
    assert np.max(np.abs(B.rhs(f, nonlinear=False).samples + 3 * np.cos(3 * g.x))) < 1e-13


def test_rhs_nonlinear_term_on_sine():
    # -u u_x for u = sin x is -sin x cos x = -sin(2x) / 2; Lambda sin x = sin x
    g = Grid(64, math.pi)
    f = Field(g, np.sin(g.x))
    ref = -np.sin(g.x) - 0.5 * np.sin(2 * g.x)
    assert np.max(np.abs(B.rhs(f).samples - ref)) < 1e-13


def test_linear_step_equals_semigroup():
    g = Grid(256, 5.0)
    u0 = gaussian(g, 1.0, 0.7)
    cfg = SolverConfig(grid=g, T_final=1.0, nonlinear=False)
    assert np.max(np.abs(B.step(u0, 0.4, cfg).samples - poisson_semigroup(u0, 0.4).samples)) < 1e-15


def test_solve_against_scipy_oracle():
    g = Grid(64, math.pi)
    u0 = Field(g, np.sin(g.x) + 0.3 * np.cos(2 * g.x))
    T = 0.5
    tr = B.solve(u0, SolverConfig(grid=g, T_final=T, dt=T / 100, besov_diagnostics=False))

    def f(t, y):
        return B.rhs(Field(g, y)).samples

    ref = solve_ivp(f, (0, T), u0.samples, method="DOP853", rtol=1e-12, atol=1e-13).y[:, -1]
    assert np.max(np.abs(tr.final.samples - ref)) < 1e-9


def test_solve_conserves_mass_and_energy():
    g = Grid(512, 20.0)
    u0 = gaussian(g, 1.0, 1.0)
    cfg = SolverConfig(grid=g, T_final=2.0, snapshot_times=(0.5, 1.0, 1.5), diag_interval=0.1)
    tr = B.solve(u0, cfg)
    assert tr.times.tolist() == pytest.approx([0.0, 0.5, 1.0, 1.5, 2.0])
    m = tr.column("mass")
    assert np.max(np.abs(m - integral(u0))) < 1e-12
    assert np.max(np.diff(tr.column("linf"))) <= 1e-12
    assert B.energy_identity_check(tr)["max_relative"] < 1e-6
    assert tr.meta["gamma"] == 1.0


def test_zero_data_stays_zero():
    g = Grid(64, math.pi)
    tr = B.solve(zeros(g), SolverConfig(grid=g, T_final=1.0, besov_diagnostics=False))
    assert np.all(tr.final.samples == 0.0)


def test_gradient_halt_for_supercritical_steep_data():
    g = Grid(1024, math.pi)
    cfg = SolverConfig(grid=g, T_final=2.0, gamma=0.6, gradient_halt=True, besov_diagnostics=False)
    with pytest.raises(BlowupHalt) as e:
        B.solve(sine(g, -4.0), cfg)
    h = e.value.trajectory.halt
    assert h["reason"] == "gradient growth"
    assert 0.2 < h["t"] < 0.5


def test_config_validation():
    g = Grid(64, math.pi)
    with pytest.raises(ValueError):
        SolverConfig(grid=g, T_final=1.0, gamma=3.0)
    with pytest.raises(ValueError):
        SolverConfig(grid=g, T_final=-1.0)
    ev = SolverConfig(grid=g, T_final=1.0, snapshot_times=(0.5, 1.0 + 1e-13), diag_interval=0.25).event_times()
    assert ev.tolist() == pytest.approx([0.25, 0.5, 0.75, 1.0])


def test_fmp_on_short_run():
    g = Grid(1024, 50.0)
    u0 = gaussian(g, 1.0, 2.0)
    cfg = SolverConfig(grid=g, T_final=2.0, snapshot_times=tuple(np.linspace(0.05, 2.0, 40)),
                       besov_diagnostics=False)
    tr = B.solve(u0, cfg)
    rep = B.freq_max_principle_check(tr)
    assert rep.holds and 0.3 < rep.c < 1.0
    assert not B.freq_max_principle_check(tr, c=3 * rep.c).holds


def test_picard_contracts_and_matches_solver():
    g = Grid(256, 10.0)
    u0 = gaussian(g, 0.5, 1.0)
    rep = B.picard_iterate(u0, 5, 0.5, steps=128)
    assert rep.contracting and max(rep.ratios) < 0.6
    times = [f.t for f in rep.iterates[-1].snapshots]
    tr = B.solve(u0, SolverConfig(grid=g, T_final=0.5, snapshot_times=tuple(times[1:]), besov_diagnostics=False))
    assert B.trajectory_distance(rep.iterates[-1].snapshots, tr.snapshots, 0.5) < 1e-3
    with pytest.raises(ValueError):
        B.picard_iterate(u0, 2, 0.5, delta=0.7)


def test_first_picard_iterate_is_free_evolution():
    g = Grid(256, 10.0)
    u0 = Field(g, np.cos(math.pi * g.x / 10.0))  # one mode, |xi| = pi / 10 < 2
    rep = B.picard_iterate(u0, 1, 0.5, steps=16)
    last = rep.iterates[0].final
    assert np.max(np.abs(last.samples - math.exp(-0.5 * math.pi / 10) * u0.samples)) < 1e-14
    assert lp_norm(last, 1) > 0
