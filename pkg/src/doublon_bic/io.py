"""Deterministic CSV/JSON writers with provenance headers."""
from __future__ import annotations

import csv
import hashlib
import json
from pathlib import Path

import numpy as np

from . import __version__

FLOAT_FMT = "{:.12e}"


def _plain(obj):
    """Convert numpy / dataclass-ish values to JSON-native types."""
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _plain(obj.tolist())
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if hasattr(obj, "value") and not isinstance(obj, (int, float, str)):
        return obj.value
    return obj


def fingerprint(obj) -> str:
    blob = json.dumps(_plain(obj), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _fmt(x) -> str:
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    x = float(x)
    if x == 0.0:
        x = 0.0  # drop the sign of -0.0
    return FLOAT_FMT.format(x)


def write_json(path, payload: dict, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    body = dict(payload)
    if meta is not None:
        body["metadata"] = meta
    text = json.dumps(_plain(body), sort_keys=True, indent=2, allow_nan=True)
    path.write_text(text + "\n")
    return path


def write_csv(path, header, rows, meta: dict | None = None) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", newline="") as fh:
        if meta is not None:
            fh.write(f"# software doublon_bic {meta.get('version', __version__)}\n")
            fh.write(f"# config_fingerprint {meta.get('fingerprint', '')}\n")
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for row in rows:
            w.writerow([_fmt(x) for x in row])
    return path


def write_timeseries_csv(path, ts, meta=None) -> Path:
    names = list(ts.channels)
    rows = zip(ts.times, *(ts.channels[n] for n in names))
    return write_csv(path, ["t"] + names, rows, meta)


def write_grid_csv(path, grid, row_values, row_label="t", col_labels=None, meta=None) -> Path:
    grid = np.asarray(grid)
    if col_labels is None:
        col_labels = [f"n{j + 1}" for j in range(grid.shape[1])]
    rows = ([r] + list(g) for r, g in zip(row_values, grid))
    return write_csv(path, [row_label] + list(col_labels), rows, meta)


def read_csv(path):
    """Header and float rows of a CSV written by this module (comments skipped)."""
    with Path(path).open() as fh:
        lines = [ln for ln in fh if not ln.startswith("#")]
    reader = csv.reader(lines)
    header = next(reader)
    data = np.array([[float(x) for x in row] for row in reader])
    return header, data


def run_metadata(config_dict: dict, **extra) -> dict:
    meta = {"version": __version__, "fingerprint": fingerprint(config_dict),
            "config": _plain(config_dict)}
    meta.update(_plain(extra))
    return meta
