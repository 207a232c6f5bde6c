"""CSV/JSON artifact writers shared by the library and the CLI.

Every floating-point value is written with 17 significant digits so that
artifacts round-trip exactly through text. Each run directory also gets a
manifest echoing the fully resolved configuration, the tool version, a
content hash of that configuration, and the wall-clock time of the run.
"""

from __future__ import annotations

import csv
import hashlib
import json
import time
from pathlib import Path

import numpy as np

TOOL_VERSION = "0.1.0"


def fmt(value) -> str:
    """Lossless text form: floats at 17 significant digits."""
    if isinstance(value, (bool, np.bool_)):
        return "1" if value else "0"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return str(value)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        for row in rows:
            w.writerow([fmt(v) for v in row])
    return path


def read_csv(path):
    """Rows of a CSV produced by write_csv, as (header, list-of-tuples)."""
    with open(path, newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        return header, [tuple(row) for row in r]


def _jsonable(obj):
    if isinstance(obj, (np.floating, np.integer)):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, complex):
        return {"re": obj.real, "im": obj.imag}
    if isinstance(obj, Path):
        return str(obj)
    raise TypeError(f"not JSON-serializable: {type(obj)!r}")


def write_json(path, obj) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_jsonable)
        fh.write("\n")
    return path


def config_hash(config: dict) -> str:
    """Short stable digest of a resolved configuration dict.

    The output directory is excluded: the same experiment written to two
    places must hash identically.
    """
    scientific = {k: v for k, v in config.items() if k != "out"}
    blob = json.dumps(scientific, sort_keys=True, default=_jsonable)
    return hashlib.sha256(blob.encode()).hexdigest()[:12]


def write_manifest(outdir, command: str, config: dict, extra: dict | None = None):
    """Write manifest.json into outdir; returns the manifest dict."""
    manifest = {
        "command": command,
        "config": config,
        "config_hash": config_hash(config),
        "tool_version": TOOL_VERSION,
        "wall_clock": time.strftime("%Y-%m-%dT%H:%M:%S%z"),
    }
    if extra:
        manifest.update(extra)
    write_json(Path(outdir) / "manifest.json", manifest)
    return manifest
