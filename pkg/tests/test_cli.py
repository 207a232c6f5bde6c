"""End-to-end checks of the command line entry point.

Every test drives ``main(argv)`` in-process and inspects the artifacts it
leaves in a temp directory.  Runs are deliberately tiny: the goal here is
wiring (config resolution, exit codes, file layout), not numerics, which
the per-module tests already pin down.
"""

import csv
import json
import subprocess
import sys

import numpy as np
import pytest

from jtenso.cli import (
    EXIT_CONFIG,
    EXIT_NO_RESULT,
    EXIT_OK,
    main,
)
from jtenso.presets import MMO_SEED


def _read_csv(path):
    with open(path) as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def _read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _run(*args):
    return main(list(args))


# ---------------------------------------------------------------------------
# exit codes and error routing


def test_no_subcommand_exits_via_argparse():
    with pytest.raises(SystemExit) as ei:
        main([])
    assert ei.value.code == 2


def test_unknown_subcommand_exits_via_argparse():
    with pytest.raises(SystemExit) as ei:
        main(["frobnicate"])
    assert ei.value.code == 2


def test_unknown_set_key_is_config_error(tmp_path, capsys):
    code = _run("simulate", "--out", str(tmp_path), "--set", "bogus=1")
    assert code == EXIT_CONFIG
    assert capsys.readouterr().err.startswith("config error:")


def test_set_without_equals_is_config_error(tmp_path, capsys):
    code = _run("simulate", "--out", str(tmp_path), "--set", "years")
    assert code == EXIT_CONFIG
    assert "config error:" in capsys.readouterr().err


def test_jobs_flag_rejected_where_schema_has_no_jobs(tmp_path):
    code = _run("simulate", "--out", str(tmp_path), "--jobs", "2")
    assert code == EXIT_CONFIG


def test_missing_config_file_is_config_error(tmp_path):
    code = _run("simulate", "--config", str(tmp_path / "nope.toml"))
    assert code == EXIT_CONFIG


def test_invalid_toml_is_config_error(tmp_path):
    cfg = tmp_path / "bad.toml"
    cfg.write_text("years = = 3\n")
    assert _run("simulate", "--config", str(cfg)) == EXIT_CONFIG


def test_unknown_key_in_config_file_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("unknown_knob = 3\n")
    assert _run("simulate", "--config", str(cfg)) == EXIT_CONFIG


def test_wrong_value_type_in_config_file_is_config_error(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text('years = "ten"\n')
    assert _run("simulate", "--config", str(cfg)) == EXIT_CONFIG


def test_bad_bool_override_is_config_error(tmp_path):
    code = _run("map1d", "--out", str(tmp_path), "--set", "write_orbit=maybe")
    assert code == EXIT_CONFIG


def test_library_value_error_maps_to_config_exit(tmp_path, capsys):
    # n = 0 passes the schema (it is an int) but the iterator rejects it
    code = _run("map1d", "--out", str(tmp_path), "--set", "n=0")
    assert code == EXIT_CONFIG
    assert "config error:" in capsys.readouterr().err


def test_epochs_without_switching_exits_no_result(tmp_path, capsys):
    seed = ",".join(repr(v) for v in MMO_SEED)
    code = _run(
        "epochs", "--out", str(tmp_path),
        "--set", f"seed_state={seed}",
        "--set", "amplitude=0.0",
        "--set", "years=300",
        "--set", "write_series=false",
    )
    assert code == EXIT_NO_RESULT
    assert capsys.readouterr().err.startswith("no result:")
    # the manifest still records the (vacuous) outcome
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["n_chaotic"] == 0
    assert manifest["n_mmo"] >= 1
    assert (tmp_path / "epochs.csv").exists()
    assert not (tmp_path / "gseries.csv").exists()
    assert not (tmp_path / "stats.json").exists()


def test_epochs_single_epoch_exits_no_result(tmp_path):
    # unforced chaotic run: one epoch, too few for statistics
    code = _run(
        "epochs", "--out", str(tmp_path),
        "--set", "amplitude=0.0",
        "--set", "years=300",
    )
    assert code == EXIT_NO_RESULT
    assert not (tmp_path / "stats.json").exists()


# ---------------------------------------------------------------------------
# simulate


def test_simulate_writes_trajectory_and_manifest(tmp_path):
    code = _run("simulate", "--out", str(tmp_path), "--set", "years=5")
    assert code == EXIT_OK
    header, rows = _read_csv(tmp_path / "trajectory.csv")
    assert header == ["t", "x", "y", "z"]
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["command"] == "simulate"
    assert manifest["n_samples"] == len(rows) == 251
    assert manifest["config"]["years"] == 5.0
    assert len(manifest["config_hash"]) == 12
    data = np.array(rows, dtype=float)
    assert np.all(np.isfinite(data))
    assert data[0, 0] == 0.0 and data[-1, 0] == pytest.approx(5.0)


def test_simulate_noise_path_decimates_to_sample_grid(tmp_path):
    code = _run(
        "simulate", "--out", str(tmp_path),
        "--set", "years=2",
        "--set", "noise_sigma=0.01",
    )
    assert code == EXIT_OK
    _, rows = _read_csv(tmp_path / "trajectory.csv")
    # 1000 steps of 0.002, kept every 10th node
    assert len(rows) == 101
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["n_samples"] == 101


def test_simulate_noise_rerun_is_bit_identical(tmp_path):
    args = ["--set", "years=1", "--set", "noise_sigma=0.02",
            "--set", "rng_seed=7"]
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("simulate", "--out", str(a), *args) == EXIT_OK
    assert _run("simulate", "--out", str(b), *args) == EXIT_OK
    assert (a / "trajectory.csv").read_bytes() == (b / "trajectory.csv").read_bytes()


def test_config_file_plus_override_precedence(tmp_path):
    cfg = tmp_path / "cfg.toml"
    cfg.write_text("years = 3.0\n")
    out = tmp_path / "out"
    code = _run("simulate", "--config", str(cfg), "--out", str(out),
                "--set", "years=1")
    assert code == EXIT_OK
    manifest = _read_json(out / "manifest.json")
    assert manifest["config"]["years"] == 1.0
    _, rows = _read_csv(out / "trajectory.csv")
    assert len(rows) == 51


def test_out_env_variable_is_honoured(tmp_path, monkeypatch):
    target = tmp_path / "envout"
    monkeypatch.setenv("JTENSO_OUT", str(target))
    assert _run("simulate", "--set", "years=1") == EXIT_OK
    assert (target / "trajectory.csv").exists()


# ---------------------------------------------------------------------------
# map1d


def test_map1d_artifacts_and_stats_schema(tmp_path):
    code = _run("map1d", "--out", str(tmp_path), "--set", "n=20000")
    assert code == EXIT_OK
    for name in ("orbit.csv", "epochs.csv", "histogram.csv", "pairs.csv"):
        assert (tmp_path / name).exists(), name
    _, orbit_rows = _read_csv(tmp_path / "orbit.csv")
    assert len(orbit_rows) == 20001
    stats = _read_json(tmp_path / "stats.json")
    assert set(stats) == {
        "n_epochs", "min_length", "max_length",
        "fit_slope", "fit_intercept", "fit_r_squared", "pair_coverage",
    }
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["n_epochs"] == stats["n_epochs"] > 0


def test_map1d_orbit_dump_is_optional(tmp_path):
    code = _run("map1d", "--out", str(tmp_path),
                "--set", "n=5000", "--set", "write_orbit=false")
    assert code == EXIT_OK
    assert not (tmp_path / "orbit.csv").exists()
    assert (tmp_path / "stats.json").exists()


def test_same_experiment_hashes_identically_across_out_dirs(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    assert _run("map1d", "--out", str(a), "--set", "n=20000") == EXIT_OK
    assert _run("map1d", "--out", str(b), "--set", "n=20000") == EXIT_OK
    ma = _read_json(a / "manifest.json")
    mb = _read_json(b / "manifest.json")
    assert ma["config_hash"] == mb["config_hash"]
    assert ma["config"]["out"] != mb["config"]["out"]
    assert (a / "stats.json").read_bytes() == (b / "stats.json").read_bytes()


# ---------------------------------------------------------------------------
# basin / ftle grids


def test_basin_grid_artifacts(tmp_path):
    code = _run("basin", "--out", str(tmp_path), "--set", "n=4")
    assert code == EXIT_OK
    header, rows = _read_csv(tmp_path / "labels.csv")
    assert header == ["c0", "c1", "c2", "c3"]
    assert len(rows) == 4
    cells = [c for row in rows for c in row]
    assert set(cells) <= set("CMPDU")
    sidecar = _read_json(tmp_path / "labels.json")
    assert sum(sidecar["counts"].values()) == 16
    assert sidecar["boundary_cells"] >= 0
    assert sidecar["grid"]["nu"] == 4
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["counts"] == sidecar["counts"]


def test_ftle_grid_artifacts(tmp_path):
    code = _run("ftle", "--out", str(tmp_path),
                "--set", "n=3", "--set", "horizon=1")
    assert code == EXIT_OK
    _, rows = _read_csv(tmp_path / "ftle.csv")
    field = np.array(rows, dtype=float)
    assert field.shape == (3, 3)
    assert np.all(np.isfinite(field))
    sidecar = _read_json(tmp_path / "ftle.json")
    assert sidecar["horizon"] == 1.0
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["max"] == pytest.approx(field.max())


# ---------------------------------------------------------------------------
# returnmap / crisis / strip


def test_returnmap_artifacts(tmp_path):
    code = _run(
        "returnmap", "--out", str(tmp_path),
        "--set", "t_max=80",
        "--set", "n_crossings=40",
        "--set", "n_samples=7",
        "--set", "rtol=1e-7", "--set", "atol=1e-9",
    )
    assert code == EXIT_OK
    _, cross_rows = _read_csv(tmp_path / "crossings.csv")
    n = len(cross_rows)
    assert n >= 2
    _, pair_rows = _read_csv(tmp_path / "zreturn.csv")
    assert len(pair_rows) == n - 1
    _, map_rows = _read_csv(tmp_path / "map.csv")
    # samples whose return never comes back are dropped from the table
    assert 2 <= len(map_rows) <= 7
    diag = _read_json(tmp_path / "map.json")
    assert set(diag) == {"a", "fixed_points", "z_at_min", "min_value",
                         "image_of_min", "horseshoe"}
    assert isinstance(diag["horseshoe"], bool)
    assert len(diag["fixed_points"]) >= 1
    for fp in diag["fixed_points"]:
        assert 0.8340 <= fp["z"] <= 0.8400
        assert np.isfinite(fp["slope"])
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["n_crossings"] == n


def test_crisis_artifacts_and_bisection_result(tmp_path):
    code = _run("crisis", "--out", str(tmp_path))
    assert code == EXIT_OK
    result = _read_json(tmp_path / "crisis.json")
    assert result["critical"] == pytest.approx(7.394125, abs=1e-12)
    lo, hi = result["bracket"]
    assert lo < result["critical"] < hi
    _, probe_rows = _read_csv(tmp_path / "probes.csv")
    assert len(probe_rows) == 3
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["critical"] == result["critical"]


def test_strip_single_delta(tmp_path):
    code = _run(
        "strip", "--out", str(tmp_path),
        "--set", "chaotic_lo=7.3930", "--set", "chaotic_hi=7.3945",
        "--set", "sn_lo=7.3915", "--set", "sn_hi=7.3920",
        "--set", "mmo_lo=7.3952", "--set", "mmo_hi=7.3956",
        "--set", "tol=5e-4",
    )
    assert code == EXIT_OK
    header, rows = _read_csv(tmp_path / "strip.csv")
    assert header == ["delta", "a_chaotic_crisis", "a_mmo_crisis"]
    assert len(rows) == 1
    row = dict(zip(header, rows[0]))
    assert float(row["delta"]) == pytest.approx(0.225423)
    assert 7.3930 <= float(row["a_chaotic_crisis"]) <= 7.3945
    assert 7.3952 <= float(row["a_mmo_crisis"]) <= 7.3956


def test_strip_all_failures_exits_no_result(tmp_path):
    # reversed bracket: every row errors out, so there is nothing to report
    code = _run(
        "strip", "--out", str(tmp_path),
        "--set", "chaotic_lo=7.3945", "--set", "chaotic_hi=7.3930",
    )
    assert code == EXIT_NO_RESULT
    _, rows = _read_csv(tmp_path / "strip.csv")
    assert len(rows) == 1
    assert rows[0][1] == "" and rows[0][2] == ""


# ---------------------------------------------------------------------------
# epochs (forced run, success path)


def test_epochs_artifacts_and_stats_schema(tmp_path):
    code = _run("epochs", "--out", str(tmp_path), "--set", "years=2000")
    assert code == EXIT_OK
    for name in ("gseries.csv", "crossings.csv", "epochs.csv",
                 "histogram.csv", "scatter.csv"):
        assert (tmp_path / name).exists(), name
    stats = _read_json(tmp_path / "stats.json")
    assert set(stats) == {
        "n_epochs", "n_chaotic", "n_mmo", "longest",
        "fit_slope", "fit_r_squared", "rank_correlation",
    }
    assert stats["n_chaotic"] >= 2 and stats["n_mmo"] >= 2
    assert stats["n_epochs"] == stats["n_chaotic"] + stats["n_mmo"]
    header, rows = _read_csv(tmp_path / "epochs.csv")
    starts = [float(r[header.index("start")]) for r in rows]
    ends = [float(r[header.index("end")]) for r in rows]
    assert starts[0] == 0.0
    assert ends[-1] == pytest.approx(2000.0, abs=1e-6)
    # epochs tile the run without gaps
    assert np.allclose(starts[1:], ends[:-1])
    manifest = _read_json(tmp_path / "manifest.json")
    assert manifest["n_chaotic"] == stats["n_chaotic"]


# ---------------------------------------------------------------------------
# installed entry point


def test_console_script_help():
    proc = subprocess.run(["jtenso", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "simulate" in proc.stdout and "epochs" in proc.stdout
