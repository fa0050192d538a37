"""CSV writers for bases, states, densities, histograms and resource tables."""

from __future__ import annotations

import csv
import hashlib
import io
import json
import os
from dataclasses import asdict, fields, is_dataclass
from pathlib import Path

import numpy as np

from .basis import TruncatedBasis, format_state


def _fmt(x) -> str:
    if isinstance(x, (float, np.floating)):
        return repr(float(x))
    return str(x)


def _write_rows(path, header: list[str], rows, comment: str | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    if comment:
        for line in comment.splitlines():
            buf.write(f"# {line}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([_fmt(x) for x in r])
    path.write_text(buf.getvalue())
    return path


def read_rows(path) -> tuple[list[str], list[list[str]]]:
    """Header and raw string rows of a CSV written here, skipping comment lines."""
    with open(path) as f:
        lines = [ln for ln in f if not ln.startswith("#")]
    rows = list(csv.reader(lines))
    return rows[0], rows[1:]


def write_basis(basis: TruncatedBasis, path) -> Path:
    rows = (
        (i, c.energy, c.particle_number, format_state(c.representative), c.beta)
        for i, c in enumerate(basis.states)
    )
    return _write_rows(path, ["index", "energy", "particle_number", "occupations", "beta"], rows)


def write_state(psi: np.ndarray, basis: TruncatedBasis, path) -> Path:
    rows = ((i, z.real, z.imag, format_state(c.representative)) for i, (z, c) in enumerate(zip(psi, basis.states)))
    return _write_rows(path, ["index", "re", "im", "label"], rows)


def write_heatmap(times, densities, path) -> Path:
    """Long-form (t, y, density) rows, one block per sample time."""
    rows = ((t, y, v) for t, d in zip(times, densities) for y, v in zip(d.y, d.values))
    return _write_rows(path, ["t", "y", "density"], rows)


def write_histograms(times, histograms, path) -> Path:
    rows = ((t, n, p) for t, h in zip(times, histograms) for n, p in sorted(h.items()))
    return _write_rows(path, ["t", "N", "probability"], rows)


def write_table(records, path, comment: str | None = None) -> Path:
    """Dataclass records as a CSV, column order following the field order."""
    records = list(records)
    if not records:
        raise ValueError("no records to write")
    if not is_dataclass(records[0]):
        raise TypeError("records must be dataclass instances")
    names = [f.name for f in fields(records[0])]
    rows = ([asdict(r)[n] for n in names] for r in records)
    return _write_rows(path, names, rows, comment)


def write_series(header: list[str], rows, path, comment: str | None = None) -> Path:
    return _write_rows(path, header, rows, comment)


def sha256_file(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


def write_json_atomic(obj, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    tmp = path.with_suffix(path.suffix + ".tmp")
    tmp.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")
    os.replace(tmp, path)
    return path
