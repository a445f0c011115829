"""Run experiment specs to disk and summarize finished run directories."""

from __future__ import annotations

import csv
import datetime as _dt
import io
import json
import math
from pathlib import Path

import numpy as np

from . import __version__
from . import asymptotics as asy
from ._kernels import BACKEND
from .burgers import energy_identity_check, freq_max_principle_check, solve
from .config import ExperimentSpec, load_spec
from .evolution import BlowupHalt
from .fieldio import read_field, write_field
from .generators import boundary_mass_fraction, make_initial
from .lp import BesovIndex, besov_report_rows, default_partition
from .sqg import sqg_solve
from .trajectory import Trajectory, read_diagnostics_csv

EXIT_OK, EXIT_SCHEMA, EXIT_HALT = 0, 2, 3


class MixedHashError(RuntimeError):
    pass


def _dump_json(path: Path, obj):
    path.write_text(json.dumps(obj, sort_keys=True, indent=2, default=_json_default) + "\n")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"cannot serialize {type(o)}")


def _write_series(path: Path, spec_hash: str, header: list, rows):
    buf = io.StringIO()
    buf.write(f"# spec_hash={spec_hash}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in r])
    path.write_text(buf.getvalue())


def _read_series(path: Path) -> tuple:
    return read_diagnostics_csv(path.read_text())


def _clean(v: float) -> float | None:
    return None if v is None or not math.isfinite(v) else v


# --- run ------------------------------------------------------------------------


def resolve_output(spec: ExperimentSpec, out: str | None) -> Path:
    if out:
        return Path(out)
    if spec.output:
        return Path(spec.output)
    return Path("runs") / spec.name


def run_spec(spec: ExperimentSpec, out_dir: Path) -> tuple:
    """Execute ``spec`` and write all artifacts; returns ``(exit_code, trajectory)``."""
    out_dir = Path(out_dir)
    meta_path = out_dir / "metadata.json"
    if meta_path.exists():
        old = json.loads(meta_path.read_text())
        if old.get("name") != spec.name:
            raise FileExistsError(f"{out_dir} already holds run {old.get('name')!r}")
    (out_dir / "snapshots").mkdir(parents=True, exist_ok=True)
    (out_dir / "plots").mkdir(exist_ok=True)
    for stale in (out_dir / "snapshots").glob("*.field"):
        stale.unlink()
    h = spec.spec_hash
    u0 = make_initial(spec.grid, spec.generator, spec.params)
    solver = solve if spec.equation == "burgers" else sqg_solve
    halt = None
    try:
        traj = solver(u0, spec.solver)
    except BlowupHalt as e:
        traj = e.trajectory
        halt = traj.halt
    (out_dir / "diagnostics.csv").write_text(traj.diagnostics_csv(h))
    for i, f in enumerate(traj.snapshots):
        write_field(out_dir / "snapshots" / f"snap_{i:05d}.field", f, h)
    results = {}
    if halt is None:
        results = _post_process(spec, traj, out_dir)
    _write_plots(spec, out_dir, sorted(results))
    meta = {
        "name": spec.name,
        "spec_hash": h,
        "spec": spec.echo(),
        "raw_spec": spec.raw,
        "version": __version__,
        "backend": BACKEND,
        "steps": traj.meta.get("steps"),
        "snapshots": len(traj.snapshots),
        "initial_boundary_mass_fraction": boundary_mass_fraction(u0),
        "halt": halt,
        "outputs": sorted(results),
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
    }
    _dump_json(meta_path, meta)
    if halt is not None:
        _dump_json(out_dir / "halt.json", {"spec_hash": h, **halt, "last_diagnostics": traj.diagnostics[-1]})
        return EXIT_HALT, traj
    return EXIT_OK, traj


def run_file(path, out: str | None = None) -> tuple:
    spec = load_spec(path)
    return run_spec(spec, resolve_output(spec, out))


def _post_process(spec: ExperimentSpec, traj: Trajectory, out: Path) -> dict:
    h = spec.spec_hash
    done = {}
    d = set(spec.diagnostics)
    if "energy" in d:
        r = energy_identity_check(traj)
        _write_series(out / "energy.csv", h, ["t", "residual", "relative"],
                      zip(r["t"], r["residual"], r["relative"]))
        done["energy"] = "energy.csv"
    if "besov" in d:
        part = default_partition(traj.grid)
        rows = []
        for f in traj.snapshots:
            rows += besov_report_rows(f, BesovIndex(0.0, math.inf, 1.0), part)
        _write_series(out / "besov.csv", h, ["t", "j", "block_linf", "besov_0_inf_1", "tail"], rows)
        done["besov"] = "besov.csv"
    if "fmp" in d:
        rep = freq_max_principle_check(traj)
        _dump_json(out / "fmp.json", {"spec_hash": h, "c": rep.c, "max_violation": rep.max_violation,
                                      "violations": rep.violations, "tolerance": rep.tolerance,
                                      "per_block": {str(k): v for k, v in rep.per_block.items()}})
        done["fmp"] = "fmp.json"
    if "decay" in d:
        fits, series = {}, {}
        for label, alpha, p in (("linf", 0.0, math.inf), ("l2", 0.0, 2.0), ("l1", 0.0, 1.0),
                                ("lambda_half_linf", 0.5, math.inf)):
            t, v = asy.norm_series(traj, alpha, p)
            series[label] = v
            try:
                fit = asy.decay_rate_fit(t, v, spec.decay_window)
                fits[label] = {"slope": fit.slope, "ci95": list(fit.ci95), "window": [fit.t_a, fit.t_b],
                               "residual": fit.residual, "samples": fit.samples}
            except ValueError as e:
                fits[label] = {"error": str(e)}
        _write_series(out / "decay_series.csv", h, ["t"] + list(series),
                      zip(traj.times, *series.values()))
        _dump_json(out / "decay.json", {"spec_hash": h, "fits": fits})
        done["decay"] = "decay.json"
    if "profile_first" in d:
        s = asy.profile_error_first(traj, spec.profile_p)
        _write_series(out / "profile_first.csv", h, ["t", "scaled_error", "tail_mass"],
                      zip(s.t, s.value, s.tail_mass))
        done["profile_first"] = "profile_first.csv"
    if "profile_second" in d:
        s = asy.profile_error_second(traj, spec.profile_p)
        _write_series(out / "profile_second.csv", h, ["t", "scaled_residual", "tail_mass"],
                      zip(s.t, s.value, s.tail_mass))
        done["profile_second"] = "profile_second.csv"
    if "analyticity" in d:
        rows = []
        for f in traj.snapshots:
            try:
                e = asy.analyticity_radius(f)
                rows.append((f.t, e.radius, e.xi_lo, e.xi_hi, e.noise_floor, e.r_squared))
            except ValueError:
                rows.append((f.t, float("nan"), float("nan"), float("nan"), float("nan"), float("nan")))
        _write_series(out / "analyticity.csv", h, ["t", "radius", "xi_lo", "xi_hi", "noise_floor", "r_squared"],
                      rows)
        done["analyticity"] = "analyticity.csv"
    return done


_PLOTS = {
    "norms": ("diagnostics.csv", "set logscale xy\nset xlabel 't'\n"
              "plot '{csv}' using 1:5 with lines title 'Linf', '' using 1:4 with lines title 'L2'\n"),
    "energy": ("energy.csv", "set xlabel 't'\nplot '{csv}' using 1:3 with lines title 'relative energy residual'\n"),
    "decay": ("decay_series.csv", "set logscale xy\nset xlabel 't'\n"
              "plot '{csv}' using 1:2 with lines title 'Linf', '' using 1:5 with lines title 'Lambda^1/2 Linf'\n"),
    "profile_first": ("profile_first.csv", "set logscale x\nset xlabel 't'\n"
                      "plot '{csv}' using 1:2 with linespoints title 'scaled first-order error'\n"),
    "profile_second": ("profile_second.csv", "set logscale x\nset xlabel 't'\n"
                       "plot '{csv}' using 1:2 with linespoints title 'scaled second-order residual'\n"),
    "analyticity": ("analyticity.csv", "set xlabel 't'\nplot '{csv}' using 1:2 with linespoints title 'radius'\n"),
}


def _write_plots(spec: ExperimentSpec, out: Path, available: list):
    h = spec.spec_hash
    for name in ["norms"] + [a for a in available if a in _PLOTS]:
        csv_name, body = _PLOTS[name]
        text = (f"# spec_hash={h}\n# gnuplot script for run {spec.name}\n"
                "set datafile separator ','\nset key autotitle columnhead\n"
                + body.format(csv=f"../{csv_name}"))
        (out / "plots" / f"{name}.gp").write_text(text)


# --- report -----------------------------------------------------------------------


def _file_hashes(run: Path) -> dict:
    found = {}
    for p in sorted(run.rglob("*")):
        if not p.is_file() or p.name in ("report.txt",):
            continue
        if p.suffix == ".field":
            _, head = read_field(p)
            found[str(p.relative_to(run))] = head.get("spec_hash", "")
        elif p.suffix == ".json":
            found[str(p.relative_to(run))] = json.loads(p.read_text()).get("spec_hash", "")
        elif p.suffix in (".csv", ".gp"):
            first = p.read_text().split("\n", 1)[0]
            found[str(p.relative_to(run))] = first.split("=", 1)[1] if first.startswith("# spec_hash=") else ""
    return found


def check_hashes(run: Path) -> str:
    run = Path(run)
    if not (run / "metadata.json").exists():
        raise FileNotFoundError(f"{run} has no metadata.json (not a completed run)")
    found = _file_hashes(run)
    hashes = set(found.values())
    if len(hashes) != 1:
        bad = sorted(k for k, v in found.items() if v != json.loads((run / "metadata.json").read_text())["spec_hash"])
        raise MixedHashError(f"{run} mixes outputs of different specs: {bad[:5]}")
    return hashes.pop()


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def _table(header: list, rows: list) -> str:
    cells = [header] + [[_fmt(c) for c in r] for r in rows]
    widths = [max(len(r[i]) for r in cells) for i in range(len(header))]
    lines = ["  ".join(c.ljust(w) for c, w in zip(r, widths)) for r in cells]
    lines.insert(1, "  ".join("-" * w for w in widths))
    return "\n".join(lines)


def summarize_run(run: Path) -> dict:
    run = Path(run)
    meta = json.loads((run / "metadata.json").read_text())
    s = {"name": meta["name"], "hash": meta["spec_hash"], "notices": [], "decay": {}, "profile": {},
         "analyticity": [], "halt": meta.get("halt")}
    if (run / "decay.json").exists():
        s["decay"] = json.loads((run / "decay.json").read_text())["fits"]
    else:
        s["notices"].append("no decay diagnostics")
    for key in ("profile_first", "profile_second"):
        p = run / f"{key}.csv"
        if p.exists():
            _, cols = _read_series(p)
            s["profile"][key] = (cols["t"], cols[list(cols)[1]])
        else:
            s["notices"].append(f"no {key} diagnostics")
    if (run / "analyticity.csv").exists():
        _, cols = _read_series(run / "analyticity.csv")
        s["analyticity"] = list(zip(cols["t"], cols["radius"], cols["xi_lo"], cols["xi_hi"]))
    else:
        s["notices"].append("no analyticity diagnostics")
    return s


def report(runs: list, force: bool = False) -> str:
    """Summary tables for one or more run directories (side by side when several)."""
    runs = [Path(r) for r in runs]
    for r in runs:
        try:
            check_hashes(r)
        except MixedHashError:
            if not force:
                raise
    sums = [summarize_run(r) for r in runs]
    out = []
    for s in sums:
        out.append(f"run {s['name']} (spec {s['hash']})")
        if s["halt"]:
            out.append(f"  halted at t={s['halt']['t']:.6g}: {s['halt']['reason']}")
        for n in s["notices"]:
            out.append(f"  notice: {n} (partial report)")
    norms = sorted({k for s in sums for k in s["decay"]})
    if norms:
        rows = []
        for k in norms:
            row = [k]
            for s in sums:
                f = s["decay"].get(k, {})
                row += [f.get("slope"), "[{:.3g}, {:.3g}]".format(*f["ci95"]) if "ci95" in f else None]
            rows.append(row)
        head = ["norm"] + [c for s in sums for c in (f"slope:{s['name']}", f"ci95:{s['name']}")]
        out += ["", "decay fits", _table(head, rows)]
    for key in ("profile_first", "profile_second"):
        have = [s for s in sums if key in s["profile"]]
        if not have:
            continue
        rows = []
        for s in have:
            t, v = s["profile"][key]
            pick = sorted(set(np.unique(np.geomspace(max(t[0], 1e-12), t[-1], min(6, t.size)).round(12))))
            for tt in pick:
                i = int(np.argmin(np.abs(t - tt)))
                rows.append([s["name"], float(t[i]), float(v[i])])
        out += ["", f"{key.replace('_', ' ')} error", _table(["run", "t", "scaled value"], rows)]
    have = [s for s in sums if s["analyticity"]]
    if have:
        rows = [[s["name"], float(t), _clean(float(r)), _clean(float(a)), _clean(float(b))]
                for s in have for (t, r, a, b) in s["analyticity"]]
        out += ["", "analyticity radius", _table(["run", "t", "radius", "xi_lo", "xi_hi"], rows)]
    text = "\n".join(out) + "\n"
    for r in runs:
        (r / "report.txt").write_text(text)
    return text
