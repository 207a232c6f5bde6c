"""Artifact loading for the documented CSV/JSON schemas."""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np


class ArtifactError(RuntimeError):
    """An input artifact is missing, malformed, or empty."""


def require(*paths) -> None:
    missing = [str(p) for p in paths if not Path(p).is_file()]
    if missing:
        raise ArtifactError("missing artifact(s): " + ", ".join(missing))


def read_columns(path) -> dict[str, list[str]]:
    """CSV file as a mapping column name -> list of raw string cells."""
    require(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ArtifactError(f"{path}: empty file, expected a header row")
    header, data = rows[0], rows[1:]
    return {name: [row[i] for row in data] for i, name in enumerate(header)}


def numeric(columns: dict, name: str, path="") -> np.ndarray:
    if name not in columns:
        raise ArtifactError(f"{path}: missing column {name!r}")
    try:
        return np.array(columns[name], dtype=float)
    except ValueError as exc:
        raise ArtifactError(f"{path}: column {name!r} is not numeric") from exc


def matrix(path) -> np.ndarray:
    """A c0..cN matrix CSV as a float array (one row per data line)."""
    require(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ArtifactError(f"{path}: no data rows")
    try:
        return np.array(rows[1:], dtype=float)
    except ValueError as exc:
        raise ArtifactError(f"{path}: non-numeric matrix cell") from exc


def char_matrix(path) -> np.ndarray:
    """Like matrix() but keeps cells as single-character labels."""
    require(path)
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    if len(rows) < 2:
        raise ArtifactError(f"{path}: no data rows")
    return np.array(rows[1:], dtype="U1")


def load_json(path) -> dict:
    require(path)
    try:
        with open(path) as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ArtifactError(f"{path}: invalid JSON: {exc}") from exc
