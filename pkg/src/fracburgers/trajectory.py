"""Time-ordered snapshots plus scalar diagnostics, with CSV export."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field

import numpy as np

from .spectral import Field, Grid

DIAGNOSTIC_COLUMNS = (
    "t",
    "mass",
    "l1",
    "l2",
    "linf",
    "b0_inf1",
    "b1_inf1",
    "dissipation",
    "dissipation_integral",
    "energy_integral",
    "grad_inf",
    "dt",
)


@dataclass
class Trajectory:
    grid: Grid
    gamma: float
    snapshots: list = field(default_factory=list)
    diagnostics: list = field(default_factory=list)  # list of dicts keyed by DIAGNOSTIC_COLUMNS
    meta: dict = field(default_factory=dict)
    halt: dict | None = None

    @property
    def fields(self) -> list:
        return list(self.snapshots)

    @property
    def times(self) -> np.ndarray:
        return np.array([f.t for f in self.snapshots])

    @property
    def initial(self) -> Field:
        return self.snapshots[0]

    @property
    def final(self) -> Field:
        return self.snapshots[-1]

    def column(self, name: str) -> np.ndarray:
        return np.array([row[name] for row in self.diagnostics], dtype=float)

    def add_snapshot(self, f: Field):
        if self.snapshots and not f.t > self.snapshots[-1].t:
            raise ValueError(f"snapshot time {f.t} does not increase past {self.snapshots[-1].t}")
        self.snapshots.append(f)

    def add_diagnostics(self, row: dict):
        if self.diagnostics and not row["t"] > self.diagnostics[-1]["t"]:
            raise ValueError("diagnostic times must increase")
        self.diagnostics.append({k: float(row.get(k, np.nan)) for k in DIAGNOSTIC_COLUMNS})

    def snapshot_at(self, t: float, rtol: float = 1e-9) -> Field:
        ts = self.times
        i = int(np.argmin(np.abs(ts - t)))
        if abs(ts[i] - t) > rtol * max(1.0, abs(t)):
            raise KeyError(f"no snapshot at t={t} (closest {ts[i]})")
        return self.snapshots[i]

    def diagnostics_csv(self, spec_hash: str = "") -> str:
        buf = io.StringIO()
        if spec_hash:
            buf.write(f"# spec_hash={spec_hash}\n")
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(DIAGNOSTIC_COLUMNS)
        for row in self.diagnostics:
            w.writerow([repr(row[k]) for k in DIAGNOSTIC_COLUMNS])
        return buf.getvalue()


def read_diagnostics_csv(text: str) -> tuple:
    """Parse :meth:`Trajectory.diagnostics_csv` output into ``(spec_hash, columns)``."""
    spec_hash = ""
    lines = []
    for line in text.splitlines():
        if line.startswith("# spec_hash="):
            spec_hash = line.split("=", 1)[1].strip()
        elif line and not line.startswith("#"):
            lines.append(line)
    rows = list(csv.reader(lines))
    header, body = rows[0], rows[1:]
    cols = {h: np.array([float(r[i]) for r in body]) for i, h in enumerate(header)}
    return spec_hash, cols
