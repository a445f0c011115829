import math

import numpy as np
import pytest
from scipy.integrate import quad

from fracburgers import kernels as K
from fracburgers.generators import gaussian
from fracburgers.lp import ZeroBlockError, default_partition
from fracburgers.spectral import Field, Grid, integral


def test_poisson_closed_form_values():
    assert K.poisson_eval(K.PoissonKernelSpec(1, 1.0), 0.0) == pytest.approx(1 / math.pi, rel=1e-15)
    assert K.poisson_eval(K.PoissonKernelSpec(1, 1.0), 1.0) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert K.poisson_eval(K.PoissonKernelSpec(2, 1.0), np.zeros(2)) == pytest.approx(1 / (2 * math.pi), rel=1e-15)
    assert K.poisson_eval(K.PoissonKernelSpec(2, 2.0), np.array([0.0, 0.0])) == pytest.approx(
        1 / (8 * math.pi), rel=1e-15)
    with pytest.raises(ValueError):
        K.PoissonKernelSpec(3, 1.0)
    with pytest.raises(ValueError):
        K.PoissonKernelSpec(1, 0.0)


def test_poisson_unit_mass_by_quadrature():
    P1 = lambda x: K.poisson_eval(K.PoissonKernelSpec(1, 0.3), x)
    P2 = lambda r: K.poisson_eval(K.PoissonKernelSpec(2, 1.0), r)
    assert quad(P1, -np.inf, np.inf)[0] == pytest.approx(1.0, abs=1e-10)
    assert quad(lambda r: 2 * math.pi * r * P2(r), 0, np.inf)[0] == pytest.approx(1.0, abs=1e-10)


def test_poisson_tail_mass():
    assert K.poisson_tail_mass(1, 2.0, 2.0) == pytest.approx(0.5)
    assert K.poisson_tail_mass(2, 1.0, 1.0) == pytest.approx(1 / math.sqrt(2))


def test_periodic_kernel_matches_image_sum():
    t, L = 0.8, 3.0
    x = np.linspace(-L, L, 7)
    images = sum(K.poisson_eval(K.PoissonKernelSpec(1, t), x + 2 * L * m) for m in range(-20000, 20001))
    assert np.max(np.abs(K.poisson_periodic_eval(t, x, L) - images)) < 2e-6


def test_poisson_field_and_semigroup():
    g = Grid(1024, 20.0)
    P = K.poisson_field(g, 0.5, mass=3.0)
    assert integral(P) == pytest.approx(3.0, rel=1e-15)
    step = K.poisson_semigroup(P, 0.25)
    assert np.max(np.abs(step.samples - K.poisson_field(g, 0.75, 3.0).samples)) < 1e-14


def test_fractional_laplacian_multiplier():
    g = Grid(64, math.pi)
    f = Field(g, np.cos(4 * g.x))
    assert np.max(np.abs(K.fractional_laplacian(f, 0.5).samples - 2 * np.cos(4 * g.x))) < 1e-13
    assert np.max(np.abs(K.fractional_laplacian(f, 2.0).samples - 16 * np.cos(4 * g.x))) < 1e-12
    for bad in (0.0, 2.5, 3.0):
        with pytest.raises(ValueError):
            K.fractional_laplacian(f, bad)


def test_c1_constant():
    assert K.calibrate_c1() == pytest.approx(1 / (2 * math.pi), rel=1e-12)


def test_quadrature_matches_multiplier_periodic():
    g = Grid(256, math.pi)
    f = Field(g, np.cos(3 * g.x))
    q = K.fractional_laplacian_quadrature(f)
    assert np.max(np.abs(q - 3 * np.cos(3 * g.x))) < 1e-10
    gg = Grid(1024, 10.0)
    u = gaussian(gg, 1.0, 1.0)
    ref = K.fractional_laplacian(u).samples
    assert np.max(np.abs(K.fractional_laplacian_quadrature(u) - ref)) < 1e-10


def test_quadrature_whole_line_mode_is_rough_but_close():
    gg = Grid(1024, 10.0)
    u = gaussian(gg, 1.0, 1.0)
    ref = K.fractional_laplacian(u).samples
    err = np.max(np.abs(K.fractional_laplacian_quadrature(u, periodic=False) - ref)) / np.max(np.abs(ref))
    assert err < 2e-2


def test_block_semigroup_pure_mode():
    g = Grid(1024, math.pi)
    p = default_partition(g)
    f = Field(g, np.cos(8 * g.x))
    d = K.block_semigroup_bounds(f, 3, 0.1, p)
    assert d.ratio == pytest.approx(math.exp(-0.8), rel=1e-12)
    assert d.exponent == pytest.approx(1.0, rel=1e-10)
    assert K.block_semigroup_bounds(f, 3, 0.0, p).ratio == 1.0
    with pytest.raises(ZeroBlockError):
        K.block_semigroup_bounds(f, 6, 0.1, p)
    with pytest.raises(ValueError):
        K.block_semigroup_bounds(f, 3, -1.0, p)
    fit = K.fit_block_constants([d, K.block_semigroup_bounds(f, 3, 0.5, p)])
    assert fit["count"] == 2 and fit["c_rate"] == pytest.approx(1.0, rel=1e-10)
