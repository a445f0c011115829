import math
from pathlib import Path

import numpy as np
import pytest

from fracburgers import config as C
from fracburgers.fieldio import field_bytes, field_csv, field_from_bytes, field_from_csv, read_field, write_field
from fracburgers.generators import GENERATORS, boundary_mass_fraction, gaussian, make_initial, random_band
from fracburgers.spectral import Field, Grid, lp_norm
from fracburgers.trajectory import Trajectory, read_diagnostics_csv


def _raw(**over):
    raw = {
        "name": "demo",
        "equation": "burgers",
        "grid": {"n": 256, "L": 20.0},
        "solver": {"T_final": 1.0, "gamma": 1.0},
        "initial": {"generator": "gaussian", "params": {"a": 1.0}},
    }
    for k, v in over.items():
        raw[k] = v
    return raw


def test_field_binary_roundtrip(tmp_path):
    g = Grid(64, 2.0, 2)
    f = Field(g, np.random.default_rng(0).standard_normal(g.shape), 1.25)
    back, head = field_from_bytes(field_bytes(f, "abc"))
    assert np.array_equal(back.samples, f.samples) and back.t == 1.25 and back.grid == g
    assert head["spec_hash"] == "abc"
    write_field(tmp_path / "f.field", f, "abc")
    back, _ = read_field(tmp_path / "f.field")
    assert np.array_equal(back.samples, f.samples)
    with pytest.raises(ValueError):
        field_from_bytes(b"garbage" * 4)


def test_field_csv_roundtrip():
    g = Grid(32, 1.0)
    f = Field(g, np.sin(np.pi * g.x), 0.5)
    text = field_csv(f, "h1")
    assert text.startswith("# spec_hash=h1")
    back, head = field_from_csv(text)
    assert head["spec_hash"] == "h1" and np.array_equal(back.samples, f.samples)


def test_trajectory_csv_and_ordering():
    g = Grid(16, 1.0)
    tr = Trajectory(g, 1.0)
    tr.add_snapshot(Field(g, np.zeros(16), 0.0))
    with pytest.raises(ValueError):
        tr.add_snapshot(Field(g, np.zeros(16), 0.0))
    tr.add_diagnostics({"t": 0.0, "mass": 1.0})
    tr.add_diagnostics({"t": 0.5, "mass": 1.0})
    h, cols = read_diagnostics_csv(tr.diagnostics_csv("hh"))
    assert h == "hh" and cols["t"].tolist() == [0.0, 0.5]


def test_parse_spec_defaults_and_echo():
    spec = C.parse_spec(_raw())
    assert spec.grid == Grid(256, 20.0)
    assert spec.solver.dt is None and spec.diagnostics == ("energy",)
    echo = spec.echo()
    assert echo["solver"]["gamma"] == 1.0 and echo["spec_hash"] == spec.spec_hash
    assert len(spec.spec_hash) == 16


def test_spec_hash_independent_of_key_order():
    a = _raw()
    b = dict(reversed(list(_raw().items())))
    assert C.spec_hash(a) == C.spec_hash(b)
    assert C.spec_hash(a) != C.spec_hash(_raw(name="other"))


@pytest.mark.parametrize("bad", [
    {"solver": {"T_final": 1.0, "gamma": 3.0}},
    {"solver": {"T_final": 0.0}},
    {"equation": "navier"},
    {"grid": {"n": 4, "L": 1.0}},
    {"grid": {"n": 100, "L": 1.0}},
    {"name": "bad name"},
    {"initial": {"generator": "gaussian2d"}},
    {"initial": {"generator": "gaussian", "seed": 3}},
    {"initial": {"generator": "gaussian", "params": {"nope": 1}}},
    {"extra": 1},
])
def test_schema_violations(bad):
    with pytest.raises(C.SpecError):
        C.parse_spec(_raw(**bad))


def test_snapshot_spacing():
    spec = C.parse_spec(_raw(snapshots={"count": 4, "spacing": "log", "t_min": 0.01}))
    assert spec.solver.snapshot_times == pytest.approx(tuple(np.geomspace(0.01, 1.0, 4)))
    spec = C.parse_spec(_raw(snapshots={"count": 4}))
    assert spec.solver.snapshot_times == pytest.approx((0.25, 0.5, 0.75, 1.0))


def test_load_spec_from_toml(tmp_path):
    p = tmp_path / "s.toml"
    p.write_text('name = "x"\nequation = "burgers"\n[grid]\nn = 64\nL = 5.0\n'
                 '[solver]\nT_final = 0.5\n[initial]\ngenerator = "sine"\n')
    assert C.load_spec(p).generator == "sine"
    with pytest.raises(C.SpecError):
        C.load_spec(tmp_path / "missing.toml")


def test_generators_registry():
    assert {"gaussian", "dipole", "poisson_profile", "sine", "random_band", "gaussian2d",
            "random_band2d"} <= set(GENERATORS)
    g = Grid(512, 20.0)
    u = make_initial(g, "gaussian", {"a": 2.0, "sigma": 1.0})
    assert np.max(u.samples) == pytest.approx(2.0)
    with pytest.raises(ValueError):
        make_initial(g, "gaussian2d", {})
    with pytest.raises(KeyError):
        make_initial(g, "nope", {})
    assert boundary_mass_fraction(gaussian(g, 1.0, 1.0)) < 1e-12


def test_random_band_is_seeded_and_scaled():
    g = Grid(512, math.pi)
    a = random_band(g, seed=5, amplitude=2.0)
    b = random_band(g, seed=5, amplitude=2.0)
    c = random_band(g, seed=6, amplitude=2.0)
    assert np.array_equal(a.samples, b.samples) and not np.array_equal(a.samples, c.samples)
    assert lp_norm(a, math.inf) == pytest.approx(2.0, rel=1e-14)


@pytest.mark.parametrize("path", sorted((Path(__file__).parent.parent / "docs" / "specs").glob("*.toml")),
                         ids=lambda p: p.stem)
def test_documented_specs_parse(path):
    spec = C.load_spec(path)
    assert spec.name == path.stem
