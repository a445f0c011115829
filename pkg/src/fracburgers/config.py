"""Experiment specification files: TOML text checked against a JSON schema."""

from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import dataclass, field
from pathlib import Path

import jsonschema
import numpy as np

from .evolution import SolverConfig
from .generators import GENERATORS
from .spectral import Grid

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

DIAGNOSTICS = ("energy", "fmp", "besov", "decay", "profile_first", "profile_second", "analyticity")

SCHEMA = {
    "type": "object",
    "required": ["name", "equation", "grid", "solver", "initial"],
    "additionalProperties": False,
    "properties": {
        "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        "equation": {"enum": ["burgers", "sqg"]},
        "output": {"type": "string"},
        "grid": {
            "type": "object",
            "required": ["n", "L"],
            "additionalProperties": False,
            "properties": {
                "n": {"type": "integer", "minimum": 8},
                "L": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "solver": {
            "type": "object",
            "required": ["T_final"],
            "additionalProperties": False,
            "properties": {
                "gamma": {"type": "number", "exclusiveMinimum": 0, "maximum": 2},
                "T_final": {"type": "number", "exclusiveMinimum": 0},
                "dt": {"oneOf": [{"const": "cfl"}, {"type": "number", "exclusiveMinimum": 0}]},
                "cfl_safety": {"type": "number", "exclusiveMinimum": 0, "maximum": 1},
                "dealias": {"type": "boolean"},
                "nonlinear": {"type": "boolean"},
                "diag_interval": {"type": "number", "exclusiveMinimum": 0},
                "gradient_halt": {"type": "boolean"},
                "gradient_halt_factor": {"type": "number", "exclusiveMinimum": 1},
                "linf_halt_factor": {"type": "number", "exclusiveMinimum": 1},
            },
        },
        "snapshots": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "times": {"type": "array", "items": {"type": "number", "exclusiveMinimum": 0}},
                "count": {"type": "integer", "minimum": 1},
                "spacing": {"enum": ["uniform", "log"]},
                "t_min": {"type": "number", "exclusiveMinimum": 0},
            },
        },
        "initial": {
            "type": "object",
            "required": ["generator"],
            "additionalProperties": False,
            "properties": {
                "generator": {"enum": sorted(GENERATORS)},
                "seed": {"type": "integer", "minimum": 0},
                "params": {"type": "object"},
            },
        },
        "diagnostics": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "list": {"type": "array", "items": {"enum": list(DIAGNOSTICS)}, "uniqueItems": True},
                "decay_window": {"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2},
                "profile_p": {"oneOf": [{"type": "number", "minimum": 1}, {"const": "inf"}]},
            },
        },
    },
}


class SpecError(ValueError):
    """The spec file is unreadable or violates the schema."""


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    equation: str
    grid: Grid
    solver: SolverConfig
    generator: str
    params: dict
    seed: int | None
    diagnostics: tuple
    decay_window: tuple
    profile_p: float
    output: str | None
    raw: dict = field(repr=False, default_factory=dict)

    @property
    def spec_hash(self) -> str:
        return spec_hash(self.raw)

    def echo(self) -> dict:
        """Every physical parameter, for run metadata."""
        s = self.solver
        return {
            "name": self.name,
            "equation": self.equation,
            "grid": {"n": self.grid.n, "L": self.grid.L, "dim": self.grid.dim, "dx": self.grid.dx},
            "solver": {
                "gamma": s.gamma,
                "T_final": s.T_final,
                "dt": "cfl" if s.dt is None else s.dt,
                "cfl_safety": s.cfl_safety,
                "dealias": s.dealias,
                "nonlinear": s.nonlinear,
                "diag_interval": s.diag_interval,
                "gradient_halt": s.gradient_monitor,
                "gradient_halt_factor": s.gradient_halt_factor,
                "linf_halt_factor": s.linf_halt_factor,
                "snapshot_times": list(s.snapshot_times),
            },
            "initial": {"generator": self.generator, "params": self.params, "seed": self.seed},
            "diagnostics": list(self.diagnostics),
            "spec_hash": self.spec_hash,
        }


def spec_hash(raw: dict) -> str:
    text = json.dumps(raw, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def _snapshot_times(snap: dict, T: float) -> tuple:
    if "times" in snap:
        return tuple(float(t) for t in snap["times"])
    count = int(snap.get("count", 10))
    if snap.get("spacing", "uniform") == "log":
        t_min = float(snap.get("t_min", T / 1000.0))
        if not t_min < T:
            raise SpecError("snapshots.t_min must be below T_final")
        return tuple(float(t) for t in np.geomspace(t_min, T, count))
    return tuple(float(t) for t in np.linspace(T / count, T, count))


def parse_spec(raw: dict) -> ExperimentSpec:
    try:
        jsonschema.validate(raw, SCHEMA)
    except jsonschema.ValidationError as e:
        where = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise SpecError(f"{where}: {e.message}") from None
    dim = 2 if raw["equation"] == "sqg" else 1
    gen = raw["initial"]["generator"]
    if GENERATORS[gen].dim != dim:
        raise SpecError(f"generator {gen} is {GENERATORS[gen].dim}D but equation {raw['equation']} is {dim}D")
    params = dict(raw["initial"].get("params", {}))
    seed = raw["initial"].get("seed")
    if seed is not None:
        if "seed" not in GENERATORS[gen].params():
            raise SpecError(f"generator {gen} is deterministic and takes no seed")
        params["seed"] = seed
    unknown = set(params) - set(GENERATORS[gen].params())
    if unknown:
        raise SpecError(f"initial.params: generator {gen} does not take {sorted(unknown)}")
    try:
        grid = Grid(raw["grid"]["n"], float(raw["grid"]["L"]), dim)
        s = raw["solver"]
        T = float(s["T_final"])
        dt = s.get("dt", "cfl")
        solver = SolverConfig(
            grid=grid,
            T_final=T,
            gamma=float(s.get("gamma", 1.0)),
            dt=None if dt == "cfl" else float(dt),
            cfl_safety=float(s.get("cfl_safety", 0.5)),
            snapshot_times=_snapshot_times(raw.get("snapshots", {}), T),
            diag_interval=s.get("diag_interval"),
            dealias=bool(s.get("dealias", True)),
            nonlinear=bool(s.get("nonlinear", True)),
            gradient_halt=s.get("gradient_halt"),
            gradient_halt_factor=float(s.get("gradient_halt_factor", 100.0)),
            linf_halt_factor=float(s.get("linf_halt_factor", 10.0)),
        )
    except ValueError as e:
        raise SpecError(str(e)) from None
    d = raw.get("diagnostics", {})
    diags = tuple(d.get("list", ["energy"]))
    if dim == 2 and {"profile_second", "fmp"} & set(diags):
        raise SpecError("profile_second and fmp diagnostics are 1D only")
    window = tuple(float(x) for x in d.get("decay_window", (T / 10.0, T)))
    p = d.get("profile_p", "inf")
    return ExperimentSpec(
        name=raw["name"],
        equation=raw["equation"],
        grid=grid,
        solver=solver,
        generator=gen,
        params=params,
        seed=seed,
        diagnostics=diags,
        decay_window=window,
        profile_p=math.inf if p == "inf" else float(p),
        output=raw.get("output"),
        raw=raw,
    )


def load_spec(path) -> ExperimentSpec:
    try:
        raw = tomllib.loads(Path(path).read_text())
    except (OSError, tomllib.TOMLDecodeError) as e:
        raise SpecError(f"cannot read spec {path}: {e}") from None
    return parse_spec(raw)
