"""Fixture artifact tree in the documented CSV/JSON schemas.

The data is synthetic but shape-correct, so these tests exercise parsing
and layout without running any simulation.
"""

import csv
import json
import math
import shutil

import pytest


def _write_csv(path, header, rows):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(header)
        w.writerows(rows)


def _write_json(path, obj):
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2)


def _manifest(path, command):
    _write_json(
        path / "manifest.json",
        {"command": command, "config": {}, "config_hash": "0" * 12},
    )


def _build_tree(root):
    # map1d: a short sign-alternating orbit and a decaying histogram
    orbit = []
    x = 0.2
    for n in range(401):
        orbit.append((n, x))
        x = 2.6 * x * (1 - x * x)
    _write_csv(root / "map1d/orbit.csv", ["n", "x"], orbit)
    _write_csv(
        root / "map1d/histogram.csv",
        ["length", "count"],
        [(l, max(1, int(200 * math.exp(-0.1 * l)))) for l in range(8, 61, 4)],
    )
    _manifest(root / "map1d", "map1d")

    # two trajectories with different excursion ranges
    for name, amp in (("simulate_chaotic", 0.4), ("simulate_mmo", 1.6)):
        rows = []
        for i in range(300):
            t = 0.02 * i
            rows.append(
                (
                    t,
                    -2.3 + amp * math.sin(0.8 * t),
                    -0.7 + 0.1 * math.cos(0.8 * t),
                    1.57 + 0.05 * math.sin(1.7 * t),
                )
            )
        _write_csv(root / name / "trajectory.csv", ["t", "x", "y", "z"], rows)
        _manifest(root / name, "simulate")

    # returnmap: crossing cloud, successive-z pairs, tabulated map
    cross = [
        (1.3 * i, -2.4839, -0.8 + 0.01 * math.sin(2.1 * i), 0.836 + 0.001 * math.cos(1.3 * i), 1)
        for i in range(40)
    ]
    _write_csv(root / "returnmap/crossings.csv", ["t", "x", "y", "z", "dir"], cross)
    zs = [0.8355 + 0.0012 * math.sin(2.7 * i) for i in range(40)]
    _write_csv(
        root / "returnmap/zreturn.csv", ["z_n", "z_next"], zip(zs[:-1], zs[1:])
    )
    z_in = [0.834 + 0.0006 * j for j in range(10)]
    z_ret = [0.8355 + 0.8 * (z - 0.8355) + 3.0 * (z - 0.8355) ** 2 for z in z_in]
    _write_csv(root / "returnmap/map.csv", ["z_in", "z_ret"], zip(z_in, z_ret))
    _write_json(
        root / "returnmap/map.json",
        {
            "a": 7.3939,
            "fixed_points": [
                {"z": 0.83542, "slope": -1.3},
                {"z": 0.83713, "slope": 4.0},
            ],
            "z_at_min": 0.83595,
            "min_value": 0.83510,
            "image_of_min": 0.83700,
            "horseshoe": False,
        },
    )
    _manifest(root / "returnmap", "returnmap")

    # basin: an 8x8 interleaved label grid
    labels = [
        ["C" if (i + j) % 3 else "M" for j in range(8)] for i in range(8)
    ]
    _write_csv(root / "basin/labels.csv", [f"c{j}" for j in range(8)], labels)
    _write_json(
        root / "basin/labels.json",
        {
            "grid": {
                "coordinate": "x",
                "value": -2.4839,
                "u_range": [-0.97, -0.55],
                "v_range": [1.46, 1.69],
                "nu": 8,
                "nv": 8,
            },
            "params": {"a": 7.3939},
            "counts": {"C": 43, "M": 21},
            "boundary_cells": 30,
            "label_chars": {
                "chaotic": "C",
                "MMO": "M",
                "periodic-non-MMO": "P",
                "divergent": "D",
                "undecided": "U",
            },
            "config_hash": "0" * 12,
        },
    )
    _manifest(root / "basin", "basin")

    # ftle: a 10x10 log10 field with a hot flank
    field = [
        [0.3 * math.sin(0.9 * i) + (4.0 if j in (1, 8) else -0.2) for j in range(10)]
        for i in range(10)
    ]
    _write_csv(root / "ftle/ftle.csv", [f"c{j}" for j in range(10)], field)
    _write_json(
        root / "ftle/ftle.json",
        {
            "grid": {
                "coordinate": "x",
                "value": -2.4839,
                "u_range": [-0.852, -0.817],
                "v_range": [1.5675, 1.5725],
                "nu": 10,
                "nv": 10,
            },
            "params": {"a": 7.3939},
            "horizon": 5.0,
            "config_hash": "0" * 12,
        },
    )
    _manifest(root / "ftle", "ftle")

    # epochs: series, thresholds, segmentation, statistics
    series = [(0.5 * i, 1.26 + 0.05 * math.sin(0.4 * i)) for i in range(401)]
    _write_csv(root / "epochs/gseries.csv", ["t", "g"], series)
    _write_csv(
        root / "epochs/crossings.csv",
        ["t", "threshold"],
        [(12.0, 1.306), (30.5, 1.22), (71.0, 1.306), (90.0, 1.22)],
    )
    _write_csv(
        root / "epochs/epochs.csv",
        ["kind", "start", "end", "duration"],
        [
            ("chaotic", 0.0, 30.5, 30.5),
            ("MMO", 30.5, 71.0, 40.5),
            ("chaotic", 71.0, 200.0, 129.0),
        ],
    )
    _write_csv(
        root / "epochs/histogram.csv",
        ["duration", "count"],
        [(5 + 10 * k, max(1, int(40 * math.exp(-0.3 * k)))) for k in range(10)],
    )
    _write_csv(
        root / "epochs/scatter.csv",
        ["d_i", "d_next"],
        [(30.5, 40.5), (40.5, 129.0)],
    )
    _manifest(root / "epochs", "epochs")


@pytest.fixture(scope="session")
def pristine_artifacts(tmp_path_factory):
    root = tmp_path_factory.mktemp("artifacts")
    _build_tree(root)
    return root


@pytest.fixture
def artifacts(pristine_artifacts, tmp_path):
    """A private copy, safe for tests that delete or truncate inputs."""
    dest = tmp_path / "artifacts"
    shutil.copytree(pristine_artifacts, dest)
    return dest


@pytest.fixture
def out_dir(tmp_path):
    return tmp_path / "figures"
