"""On-disk field container: a small binary format and a CSV variant.

Binary layout: the 8-byte magic ``FBFIELD1``, a little-endian uint32 header
length, a UTF-8 JSON header (``dim``, ``n``, ``L``, ``t``, ``spec_hash``),
then the samples as little-endian float64 in row-major order.
"""

from __future__ import annotations

import json
import struct
from pathlib import Path

import numpy as np

from .spectral import Field, Grid

MAGIC = b"FBFIELD1"


def _header(f: Field, spec_hash: str) -> dict:
    g = f.grid
    return {"dim": g.dim, "n": g.n, "L": g.L, "t": f.t, "spec_hash": spec_hash}


def field_bytes(f: Field, spec_hash: str = "") -> bytes:
    head = json.dumps(_header(f, spec_hash), sort_keys=True).encode()
    body = np.ascontiguousarray(f.samples, dtype="<f8").tobytes()
    return MAGIC + struct.pack("<I", len(head)) + head + body


def field_from_bytes(data: bytes) -> tuple:
    """Return ``(field, header)``."""
    if data[:8] != MAGIC:
        raise ValueError("not a field file (bad magic)")
    (hl,) = struct.unpack("<I", data[8:12])
    head = json.loads(data[12:12 + hl].decode())
    grid = Grid(int(head["n"]), float(head["L"]), int(head["dim"]))
    body = np.frombuffer(data[12 + hl:], dtype="<f8")
    if body.size != np.prod(grid.shape):
        raise ValueError(f"payload holds {body.size} values, header expects {np.prod(grid.shape)}")
    return Field(grid, body.reshape(grid.shape).astype(np.float64), float(head["t"])), head


def write_field(path, f: Field, spec_hash: str = ""):
    Path(path).write_bytes(field_bytes(f, spec_hash))


def read_field(path) -> tuple:
    return field_from_bytes(Path(path).read_bytes())


def field_csv(f: Field, spec_hash: str = "") -> str:
    """Text variant: ``# key=value`` header lines (spec hash first), then one grid row per line."""
    head = _header(f, spec_hash)
    lines = [f"# spec_hash={head.pop('spec_hash')}"]
    lines += [f"# {k}={v!r}" for k, v in sorted(head.items())]
    s = f.samples if f.grid.dim == 2 else f.samples[None, :]
    lines += [",".join(repr(float(v)) for v in row) for row in s]
    return "\n".join(lines) + "\n"


def field_from_csv(text: str) -> tuple:
    head, rows = {}, []
    for line in text.splitlines():
        if line.startswith("# "):
            k, v = line[2:].split("=", 1)
            head[k] = v
        elif line.strip():
            rows.append([float(x) for x in line.split(",")])
    grid = Grid(int(head["n"]), float(head["L"]), int(head["dim"]))
    a = np.array(rows)
    if grid.dim == 1:
        a = a.ravel()
    return Field(grid, a, float(head["t"])), head
