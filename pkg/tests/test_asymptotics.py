import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracburgers import asymptotics as A
from fracburgers import burgers as B
from fracburgers.evolution import SolverConfig
from fracburgers.generators import gaussian, poisson_profile
from fracburgers.kernels import PoissonKernelSpec, poisson_eval, poisson_periodic_eval
from fracburgers.spectral import Field, Grid


def test_mass_and_first_moment():
    g = Grid(1024, 30.0)
    u0 = gaussian(g, 2.0, 1.0, 0.5)
    assert A.mass(u0) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-12)
    assert A.first_moment(u0) == pytest.approx(0.5 * 2 * math.sqrt(math.pi), rel=1e-10)


def test_profile_error_first_linear_closed_form():
    g = Grid(2048, 50.0)
    a, M = 0.5, 2.0
    u0 = poisson_profile(g, a, M)
    cfg = SolverConfig(grid=g, T_final=4.0, nonlinear=False, snapshot_times=(1.0, 2.0, 3.0),
                       besov_diagnostics=False)
    s = A.profile_error_first(B.solve(u0, cfg))
    for t in (1.0, 2.0, 4.0):
        gap = M * (poisson_periodic_eval(a + t, 0.0, g.L) - poisson_periodic_eval(t, 0.0, g.L))
        assert s.at(t) == pytest.approx(t * abs(gap), rel=1e-9)
    assert s.scale_exponent == 1.0
    with pytest.raises(KeyError):
        s.at(1.5)


def test_squared_profile_integral_closed_form():
    def inner(s):
        return quad(lambda x: poisson_eval(PoissonKernelSpec(1, s + 1.0), x) ** 2, -np.inf, np.inf)[0]

    t, M = 3.0, 1.7
    ref = M * M * quad(inner, 0.0, t)[0]
    assert A.squared_profile_mass_integral(t, M) == pytest.approx(ref, rel=1e-9)
    assert A.squared_profile_mass_integral(t, M) == pytest.approx(M * M * math.log(1 + t) / (2 * math.pi))


def test_convolution_correction_matches_quadrature():
    g = Grid(1024, 40.0)
    a = A.convolution_correction(g, 2.0, 1.5).samples
    b = A.convolution_correction_quadrature(g, 2.0, 1.5).samples
    assert np.max(np.abs(a - b)) <= 1e-6 * np.max(np.abs(a))


def test_decay_fit_exact_power_law():
    t = np.geomspace(1, 100, 30)
    fit = A.decay_rate_fit(t, 3.0 * t ** -1.5, (2.0, 80.0))
    assert fit.slope == pytest.approx(-1.5, abs=1e-12)
    assert math.exp(fit.intercept) == pytest.approx(3.0, rel=1e-10)
    lo, hi = fit.ci95
    assert lo <= fit.slope <= hi
    with pytest.raises(ValueError):
        A.decay_rate_fit(t, t ** -1.0, (10.0, 15.0))
    with pytest.raises(ValueError):
        A.decay_rate_fit(t[:5], t[:5] ** -1.0, (1.0, 10.0))


def test_fractional_derivative_norm():
    g = Grid(128, math.pi)
    f = Field(g, np.cos(4 * g.x))
    assert A.fractional_derivative_norm(f, 0.5) == pytest.approx(2.0, rel=1e-12)
    assert A.fractional_derivative_norm(f, 0.0, 2.0) == pytest.approx(math.sqrt(math.pi), rel=1e-12)
    with pytest.raises(ValueError):
        A.fractional_derivative_norm(f, -1.0)


def test_analyticity_radius_of_poisson_profile():
    g = Grid(4096, 100.0)
    for a in (0.5, 1.0, 2.0):
        est = A.analyticity_radius(poisson_profile(g, a))
        assert est.radius == pytest.approx(a, rel=1e-2)
        assert est.decades >= 1.5 and est.r_squared >= 0.995


def test_analyticity_radius_grows_linearly_without_nonlinearity():
    g = Grid(4096, 100.0)
    cfg = SolverConfig(grid=g, T_final=2.0, nonlinear=False, snapshot_times=(0.5, 1.0), besov_diagnostics=False)
    tr = B.solve(poisson_profile(g, 0.5), cfg)
    for f in tr.snapshots[1:]:
        assert A.analyticity_radius(f).radius == pytest.approx(0.5 + f.t, rel=1e-2)


def test_time_derivatives_linear_part_and_fd():
    g = Grid(128, math.pi)
    f = Field(g, 1e-8 * np.cos(2 * g.x))
    d = A.time_derivatives(f, 3)
    for k in range(4):
        assert np.max(np.abs(d[k].samples - (-2.0) ** k * f.samples)) < 1e-14
    gg = Grid(512, 20.0)
    cfg = SolverConfig(grid=gg, T_final=1.0, dt=1e-3, snapshot_times=(0.499, 0.5, 0.501),
                       besov_diagnostics=False)
    tr = B.solve(gaussian(gg, 1.0, 1.0), cfg)
    assert A.time_derivative_fd_check(tr, 2) < 1e-5


def test_weighted_derivative_report():
    gg = Grid(512, 20.0)
    cfg = SolverConfig(grid=gg, T_final=1.0, snapshot_times=(0.25, 0.5), besov_diagnostics=False)
    tr = B.solve(gaussian(gg, 1.0, 1.0), cfg)
    rep = A.weighted_derivative_check(tr, alpha_max=3)
    assert set(rep.b) == {(at, ax) for at in range(4) for ax in range(4 - at) if at + ax}
    assert rep.C0 > 0 and rep.C1 > 0 and rep.bounded
    with pytest.raises(ValueError):
        A.weighted_derivative_check(tr, alpha_max=9)
