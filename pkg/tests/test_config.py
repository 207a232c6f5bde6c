"""Config schema resolution, TOML loading, overrides, environment."""

import pytest

from jtenso.config import SCHEMAS, load_file, outdir, parse_override, resolve
from jtenso.errors import ConfigError
from jtenso.presets import MMO_SEED


def test_every_command_resolves_to_full_defaults():
    for command, schema in SCHEMAS.items():
        cfg = resolve(command)
        assert set(cfg) == {f.name for f in schema}


def test_simulate_defaults():
    cfg = resolve("simulate")
    assert cfg["seed_state"] == list(MMO_SEED)
    assert cfg["years"] == 100.0
    assert cfg["a"] == 7.3939
    assert cfg["out"] == "out"


def test_unknown_command_and_key_rejected():
    with pytest.raises(ConfigError):
        resolve("spectra")
    with pytest.raises(ConfigError):
        resolve("simulate", {"yeers": 10})
    with pytest.raises(ConfigError):
        resolve("simulate", overrides={"jobs": 2})  # simulate has no jobs


def test_type_checking():
    with pytest.raises(ConfigError):
        resolve("simulate", {"years": "ten"})
    with pytest.raises(ConfigError):
        resolve("map1d", {"n": 2.5})
    # bool is not a number even though it subclasses int
    with pytest.raises(ConfigError):
        resolve("simulate", {"years": True})
    # ints coerce to float where a float is expected
    cfg = resolve("simulate", {"years": 10})
    assert cfg["years"] == 10.0 and isinstance(cfg["years"], float)


def test_overrides_beat_file_values():
    cfg = resolve("simulate", {"years": 10}, {"years": 20})
    assert cfg["years"] == 20.0


def test_floats_list_coercion():
    cfg = resolve("strip", {"deltas": [1, 2.5]})
    assert cfg["deltas"] == [1.0, 2.5]
    with pytest.raises(ConfigError):
        resolve("strip", {"deltas": 0.2})


def test_load_file_round_trip(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text('years = 12.5\namplitude = 0.002\n')
    data = load_file(path)
    assert data == {"years": 12.5, "amplitude": 0.002}
    cfg = resolve("simulate", data)
    assert cfg["years"] == 12.5


def test_load_file_rejects_nested_tables(tmp_path):
    path = tmp_path / "run.toml"
    path.write_text("[section]\nyears = 5\n")
    with pytest.raises(ConfigError):
        load_file(path)


def test_load_file_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_file(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("years = = 5\n")
    with pytest.raises(ConfigError):
        load_file(bad)


def test_env_overrides(monkeypatch):
    monkeypatch.setenv("JTENSO_OUT", "/tmp/elsewhere")
    monkeypatch.setenv("JTENSO_JOBS", "3")
    cfg = resolve("basin")
    assert cfg["out"] == "/tmp/elsewhere"
    assert cfg["jobs"] == 3
    # commands without a jobs field ignore JTENSO_JOBS
    cfg = resolve("simulate")
    assert cfg["out"] == "/tmp/elsewhere"
    assert "jobs" not in cfg
    monkeypatch.setenv("JTENSO_JOBS", "many")
    with pytest.raises(ConfigError):
        resolve("basin")


@pytest.mark.parametrize(
    "text, expected",
    [
        ("years=25", ("years", 25.0)),
        ("noise_sigma = 0.01", ("noise_sigma", 0.01)),
        ("seed_state=1,2,3", ("seed_state", [1.0, 2.0, 3.0])),
    ],
)
def test_parse_override_values(text, expected):
    assert parse_override("simulate", text) == expected


@pytest.mark.parametrize("raw, value", [
    ("true", True), ("1", True), ("yes", True),
    ("false", False), ("0", False), ("no", False),
])
def test_parse_override_bool_forms(raw, value):
    assert parse_override("map1d", f"write_orbit={raw}") == ("write_orbit", value)


def test_parse_override_errors():
    with pytest.raises(ConfigError):
        parse_override("simulate", "years")  # no '='
    with pytest.raises(ConfigError):
        parse_override("simulate", "nope=1")
    with pytest.raises(ConfigError):
        parse_override("simulate", "years=soon")
    with pytest.raises(ConfigError):
        parse_override("map1d", "write_orbit=maybe")


def test_outdir_creates_directories(tmp_path):
    target = tmp_path / "a" / "b"
    path = outdir({"out": str(target)})
    assert path.is_dir()
    assert path == target
