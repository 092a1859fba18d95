"""Run persistence: output directories, snapshot files, and reports.

Every command writes into ``<base>/<command>/<run-name>/``.  The run name
is either supplied by the caller or derived from a UTC timestamp.  A run
directory holds ``config.echo`` (reparseable), ``series.csv``, optional
``snap_<t>.csv`` files, and a ``report.json`` summary.  All CSV output
uses shortest round-trip float formatting so a read back followed by a
rewrite is byte identical.
"""

from __future__ import annotations

import json
import re
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .config import config_echo
from .series import TimeSeries
from .solver import RunResult, Snapshot

__all__ = [
    "run_directory",
    "snapshot_filename",
    "write_snapshot",
    "read_snapshot",
    "write_report",
    "read_report",
    "write_run",
]

_SNAP_RE = re.compile(r"^snap_(?P<t>[^/]+)\.csv$")


def run_directory(base, command: str, name: str | None = None) -> Path:
    """Create and return ``<base>/<command>/<name>``.

    Without an explicit name a UTC timestamp is used; collisions get a
    numeric suffix so concurrent runs never share a directory.
    """
    root = Path(base) / command
    if name is not None:
        out = root / name
        out.mkdir(parents=True, exist_ok=True)
        return out
    stamp = datetime.now(timezone.utc).strftime("%Y%m%d-%H%M%S")
    out = root / stamp
    suffix = 1
    while True:
        try:
            out.mkdir(parents=True, exist_ok=False)
            return out
        except FileExistsError:
            suffix += 1
            out = root / f"{stamp}-{suffix}"


def snapshot_filename(t: float) -> str:
    return f"snap_{float(t):g}.csv"


def write_snapshot(out_dir, snap: Snapshot) -> Path:
    """Write one snapshot as ``x,phi,v`` rows; v is zero when absent."""
    path = Path(out_dir) / snapshot_filename(snap.t)
    x = snap.phi.grid.x
    phi = snap.phi.values
    v = np.zeros_like(phi) if snap.v is None else snap.v.values
    with open(path, "w") as fh:
        fh.write("x,phi,v\n")
        for row in zip(x, phi, v):
            fh.write(",".join(repr(float(c)) for c in row) + "\n")
    return path


def read_snapshot(path) -> tuple[float, np.ndarray, np.ndarray, np.ndarray]:
    """Return ``(t, x, phi, v)`` from a snapshot file.

    The time is recovered from the file name, which is how snapshots are
    keyed on disk.
    """
    path = Path(path)
    m = _SNAP_RE.match(path.name)
    if m is None:
        raise ValueError(f"not a snapshot file name: {path.name!r}")
    t = float(m.group("t"))
    raw = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    if raw.shape[1] != 3:
        raise ValueError(f"expected 3 columns in {path}, got {raw.shape[1]}")
    return t, raw[:, 0], raw[:, 1], raw[:, 2]


def write_report(out_dir, payload: dict) -> Path:
    path = Path(out_dir) / "report.json"
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def read_report(out_dir) -> dict:
    with open(Path(out_dir) / "report.json") as fh:
        return json.load(fh)


def _series_summary(series: TimeSeries) -> dict:
    out: dict[str, float] = {}
    t = series["t"]
    out["records"] = int(len(series))
    out["t_first"] = float(t[0])
    out["t_last"] = float(t[-1])
    for name in ("free_energy", "period"):
        if name in series:
            col = series[name]
            out[f"final_{name}"] = float(col[-1])
    return out


def write_run(out_dir, result: RunResult, command: str = "simulate",
              extra: dict | None = None) -> dict:
    """Persist a run and return the report payload that was written."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    with open(out_dir / "config.echo", "w") as fh:
        fh.write(config_echo(result.config))
    result.series.to_csv(out_dir / "series.csv")
    snap_files = [write_snapshot(out_dir, s).name for s in result.snapshots]
    report = {
        "command": command,
        "coupling": result.config.coupling,
        "seed": result.config.seed,
        "resolution_ok": bool(result.resolution_ok),
        "resolution_tail": float(result.resolution_tail),
        "snapshots": snap_files,
        "series": _series_summary(result.series),
    }
    if extra:
        report.update(extra)
    write_report(out_dir, report)
    return report
