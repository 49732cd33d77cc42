"""CSV series, JSON manifests, and output-file guards."""

from __future__ import annotations

import csv
import datetime as _dt
import hashlib
import json
import os
import platform
from pathlib import Path

import numpy as np

from . import __version__
from .errors import MalformedInput, OutputExists
from .series import TimeSeries


def fmt(x: float) -> str:
    return format(float(x), ".17g")


def guard(path: Path, force: bool) -> Path:
    path = Path(path)
    if path.exists() and not force:
        raise OutputExists(f"{path} exists; pass --force to overwrite")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_series(path, series: TimeSeries, force: bool = False) -> Path:
    path = guard(path, force)
    with open(path, "w", newline="") as fh:
        fh.write("t,P\n")
        for t, v in zip(series.t, series.values):
            fh.write(f"{int(t)},{fmt(v)}\n")
    return path


def read_series(path) -> TimeSeries:
    """Parse a ``t,P`` CSV; errors name the offending line."""
    path = Path(path)
    ts, vs = [], []
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["t", "P"]:
            raise MalformedInput(f"{path}:1: expected header 't,P', got {header!r}")
        for lineno, row in enumerate(reader, start=2):
            if not row:
                continue
            if len(row) != 2:
                raise MalformedInput(f"{path}:{lineno}: expected 2 fields, got {len(row)}")
            try:
                ts.append(int(row[0]))
                vs.append(float(row[1]))
            except ValueError as exc:
                raise MalformedInput(f"{path}:{lineno}: {exc}") from None
    if not ts:
        raise MalformedInput(f"{path}: no data rows")
    try:
        return TimeSeries(np.array(ts), np.array(vs))
    except ValueError as exc:
        raise MalformedInput(f"{path}: {exc}") from None


def write_rows(path, header: list[str], rows, force: bool = False) -> Path:
    path = guard(path, force)
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_json(path, payload: dict, force: bool = False) -> Path:
    path = guard(path, force)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def _jsonable(obj):
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, Path):
        return str(obj)
    if isinstance(obj, tuple):
        return list(obj)
    raise TypeError(f"not JSON serialisable: {type(obj).__name__}")


def digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for block in iter(lambda: fh.read(1 << 20), b""):
            h.update(block)
    return h.hexdigest()


def manifest(command: str, config: dict, files, wall_time: float, **extra) -> dict:
    """Run record referencing every emitted data file by path and sha256."""
    out = {
        "command": command,
        "config": config,
        "version": __version__,
        "python": platform.python_version(),
        "timestamp": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "wall_time_s": wall_time,
        "files": {Path(f).name: digest(f) for f in files},
    }
    out.update(extra)
    return out


def available_memory() -> int | None:
    try:
        return os.sysconf("SC_AVPHYS_PAGES") * os.sysconf("SC_PAGE_SIZE")
    except (ValueError, OSError, AttributeError):
        return None
