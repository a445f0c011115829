import math

import numpy as np
import pytest

from fracburgers.generators import random_band
from fracburgers.lp import (BesovIndex, TrajectoryNormIndex, ZeroBlockError, bernstein_ratio, besov_norm,
                            besov_report_rows, block_project, block_via_convolution, bony_decompose,
                            build_partition, chemin_lerner_norm, default_partition, interpolation_check,
                            partial_sum, phi_profile, psi_profile, smooth_step)
from fracburgers.spectral import Field, Grid, derivative
from fracburgers.trajectory import Trajectory

G = Grid(1024, math.pi)


def test_profiles_frozen():
    assert smooth_step(np.array([0.0, 0.5, 0.75, 1.0])).tolist() == pytest.approx([1.0, 1.0, 0.5, 0.0])
    assert phi_profile(np.array([1.0, 2.0, 3.0, 4.0]), 1).tolist() == pytest.approx([0.0, 1.0, 0.5, 0.0])
    assert psi_profile(np.array([0.0, 1.0, 1.5, 2.0])).tolist() == pytest.approx([1.0, 1.0, 0.5, 0.0])


def test_default_partition_band():
    p = default_partition(G)
    assert (p.j_min, p.j_max) == (0, 8)
    e = p.identity_errors()
    assert e["homogeneous"] < 1e-14 and e["inhomogeneous"] < 1e-14


def test_build_partition_rejects_unresolved_blocks():
    with pytest.raises(ValueError):
        build_partition(G, 0, 9)
    with pytest.raises(ValueError):
        build_partition(G, -2, 4)
    with pytest.raises(ValueError):
        build_partition(G, 5, 4)


def test_pure_mode_lives_in_one_block():
    p = default_partition(G)
    f = Field(G, np.cos(8 * G.x))
    assert np.max(np.abs(block_project(f, 3, p).samples - f.samples)) < 1e-13
    for j in (2, 4):
        assert np.max(np.abs(block_project(f, j, p).samples)) < 1e-13


def test_besov_norm_of_pure_mode():
    p = default_partition(G)
    f = Field(G, np.cos(8 * G.x))
    for s in (-0.5, 0.0, 1.0):
        assert besov_norm(f, BesovIndex(s), p) == pytest.approx(2.0 ** (3 * s), rel=1e-12)
        assert besov_norm(f, BesovIndex(s, math.inf, 1), p) == pytest.approx(2.0 ** (3 * s), rel=1e-12)
    one = Field(G, np.ones(G.n))
    assert besov_norm(one, BesovIndex(1.0, homogeneous=False), p) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ValueError):
        BesovIndex(0.0, p=0.5)


def test_besov_report_rows_shape():
    p = default_partition(G)
    rows = besov_report_rows(Field(G, np.cos(8 * G.x)), BesovIndex(0.0), p)
    assert [r[1] for r in rows] == list(p.homogeneous_band)
    assert rows[0][3] == pytest.approx(1.0)


def test_partial_sum_keeps_low_modes():
    p = default_partition(G)
    f = Field(G, np.cos(G.x) + np.cos(64 * G.x))
    s = partial_sum(f, 4, p)
    assert np.max(np.abs(s.samples - np.cos(G.x))) < 1e-13
    assert np.max(np.abs(partial_sum(f, -1, p).samples)) == 0.0


def test_convolution_block_matches_multiplier():
    g = Grid(128, math.pi)
    p = default_partition(g)
    f = random_band(g, seed=3, j_lo=0, j_hi=5)
    for j in (1, 3, 5):
        a = block_via_convolution(f, j, p).samples
        b = block_project(f, j, p).samples
        assert np.max(np.abs(a - b)) < 1e-12


def test_bernstein_ratio_pure_mode_is_one():
    p = default_partition(G)
    assert bernstein_ratio(Field(G, np.sin(16 * G.x + 0.3)), 4, p) == pytest.approx(1.0, rel=1e-12)
    with pytest.raises(ZeroBlockError):
        bernstein_ratio(Field(G, np.sin(16 * G.x)), 7, p)


def test_bony_low_high_only():
    p = default_partition(G)
    u = Field(G, np.cos(G.x))
    v = Field(G, np.cos(32 * G.x))
    parts = bony_decompose(u, v, p)
    ref = u.samples * derivative(v).samples
    assert np.max(np.abs(parts.T_lowhigh.samples - ref)) < 1e-11
    assert np.max(np.abs(parts.T_highlow.samples)) < 1e-11
    assert np.max(np.abs(parts.R.samples)) < 1e-11


def test_bony_total_for_distinct_factors():
    p = default_partition(G)
    u = random_band(G, seed=1, j_lo=0, j_hi=7)
    v = random_band(G, seed=2, j_lo=0, j_hi=7)
    total = bony_decompose(u, v, p).total().samples
    ref = u.samples * derivative(v).samples
    assert np.max(np.abs(total - ref)) <= 1e-12 * np.max(np.abs(ref))


def _static(f, T, n=11):
    return Trajectory(f.grid, 1.0, snapshots=[f.with_time(t) for t in np.linspace(0, T, n)])


def test_chemin_lerner_static_trajectory():
    p = default_partition(G)
    tr = _static(Field(G, np.cos(8 * G.x)), 2.0)
    for r, s in ((1, 0.0), (2, 0.5), (math.inf, 1.0)):
        expect = (2.0 ** (1.0 / r) if not math.isinf(r) else 1.0) * 2.0 ** (3 * s)
        got = chemin_lerner_norm(tr, TrajectoryNormIndex(r, 2.0, BesovIndex(s)), p)
        assert got == pytest.approx(expect, rel=1e-12)
    with pytest.raises(ValueError):
        chemin_lerner_norm(tr, TrajectoryNormIndex(1, 3.0, BesovIndex(0.0)), p)


def test_interpolation_static_is_equality():
    p = default_partition(G)
    tr = _static(Field(G, np.cos(8 * G.x)), 1.0)
    for hom in (True, False):
        r = interpolation_check(tr, p, homogeneous=hom)
        assert r["holds"]
        assert r["lhs"] == pytest.approx(r["rhs"], rel=1e-12)
