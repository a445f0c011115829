import math

import numpy as np
import pytest

from fracburgers import sqg as S
from fracburgers.evolution import SolverConfig
from fracburgers.generators import gaussian2d, random_band2d
from fracburgers.kernels import poisson_semigroup
from fracburgers.spectral import Field, Grid, integral, zeros

G = Grid(64, math.pi, 2)


def test_riesz_test_vector():
    # multiplier -i xi_k / |xi|: theta = cos x1 gives u = (0, sin x1)
    x, y = G.coords
    u1, u2 = S.riesz_velocity(Field(G, np.cos(x)))
    assert np.max(np.abs(u1.samples)) < 1e-14
    assert np.max(np.abs(u2.samples - np.sin(x))) < 1e-14
    u1, u2 = S.riesz_velocity(Field(G, np.cos(y)))
    assert np.max(np.abs(u1.samples + np.sin(y))) < 1e-14
    assert np.max(np.abs(u2.samples)) < 1e-14


def test_riesz_symbol_zero_at_origin():
    for axis in (0, 1):
        assert S.riesz_symbol(G, axis)[0, 0] == 0


def test_divergence_free_random():
    th = random_band2d(G, seed=4, j_lo=0, j_hi=4)
    assert S.SqgState(th).divergence_error() < 1e-13


def test_radial_theta_gives_tangential_velocity():
    g = Grid(128, 10.0, 2)
    th = gaussian2d(g, 1.0, 1.5)
    u1, u2 = S.riesz_velocity(th)
    x, y = g.coords
    r = np.hypot(x, y)
    on_rays = (np.abs(y) < 1e-12) | (np.abs(x) < 1e-12) | (np.abs(np.abs(x) - np.abs(y)) < 1e-12)
    sel = on_rays & (r > 0)
    radial = (u1.samples * x + u2.samples * y)[sel] / r[sel]
    assert np.max(np.abs(radial)) < 1e-8


def test_zero_and_linear_runs():
    cfg = SolverConfig(grid=G, T_final=0.5, besov_diagnostics=False)
    assert np.all(S.sqg_solve(zeros(G), cfg).final.samples == 0)
    th = gaussian2d(G, 1.0, 0.8)
    lin = SolverConfig(grid=G, T_final=0.5, nonlinear=False, besov_diagnostics=False)
    out = S.sqg_solve(th, lin).final
    assert np.max(np.abs(out.samples - poisson_semigroup(th, 0.5).samples)) < 1e-14


def test_sqg_run_invariants():
    g = Grid(128, 16.0, 2)
    th = gaussian2d(g, 1.0, 2.0, 1.5)
    cfg = SolverConfig(grid=g, T_final=5.0, diag_interval=0.25, besov_diagnostics=False)
    tr = S.sqg_solve(th, cfg)
    m = tr.column("mass")
    assert np.max(np.abs(m - integral(th))) < 1e-9
    for c in ("l1", "l2", "linf"):
        assert np.max(np.diff(tr.column(c))) <= 1e-10
    e0 = tr.column("l2")[0] ** 2
    resid = tr.column("l2") ** 2 + 2 * tr.column("dissipation_integral") - e0
    assert np.max(np.abs(resid)) <= 1e-5 * e0


def test_sqg_rhs_requires_2d():
    with pytest.raises(ValueError):
        S.sqg_rhs(zeros(Grid(64, 1.0)))
