"""Command-line driver: one subcommand per experiment.

All subcommands follow the same shape: read a flat TOML config (every key
optional, strict schema), apply --set overrides, run the experiment, and
write CSV/JSON artifacts plus a manifest into the output directory.
Deterministic experiments re-run bit-identically from their manifest.

Exit codes: 0 success, 2 configuration problem, 3 numerical failure,
4 no result (the run was fine but produced nothing to report).
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from . import analysis, artifacts, epochs, map1d, sections
from . import config as cfgmod
from . import kernels as kn
from .errors import ConfigError, NoEpochs, NumericsError, ToolkitError
from .integrators import IntegratorConfig
from .model import Forcing, ModelParams, find_equilibrium

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICS = 3
EXIT_NO_RESULT = 4


def _params(cfg) -> ModelParams:
    return ModelParams(
        delta=cfg["delta"], rho=cfg["rho"], c=cfg["c"], k=cfg["k"], a=cfg["a"]
    )


def _icfg(cfg) -> IntegratorConfig:
    return IntegratorConfig(rtol=cfg["rtol"], atol=cfg["atol"])


def _jobs(cfg) -> int:
    n = int(cfg.get("jobs", 0))
    return analysis.default_jobs() if n <= 0 else n


def _seed3(cfg, key="seed_state") -> np.ndarray:
    s = np.asarray(cfg[key], dtype=float)
    if s.shape != (3,):
        raise ConfigError(f"{key} must be three numbers [x, y, z]")
    return s


def cmd_simulate(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    s0 = _seed3(cfg)
    years, dt = cfg["years"], cfg["sample_dt"]
    forcing = Forcing(
        a0=p.a,
        amplitude=cfg["amplitude"],
        omega=cfg["omega"],
        noise_sigma=cfg["noise_sigma"],
        seed=cfg["rng_seed"],
    )
    P = kn.pack_params(p, forcing)
    if forcing.noise_sigma > 0.0:
        # fixed-step stochastic path, decimated to the sample grid
        from .integrators import NoisePlan, integrate_sde

        plan = NoisePlan(
            sigma=forcing.noise_sigma, dt=cfg["noise_dt"], seed=forcing.seed
        )
        from .model import flow_rhs

        traj = integrate_sde(flow_rhs(p, forcing), s0, (0.0, years), plan)
        every = max(1, int(round(dt / cfg["noise_dt"])))
        ts = traj.times[::every]
        states = traj.states[::every]
    else:
        states, status = kn.sample_states_k(
            s0[0], s0[1], s0[2], 0.0, years, dt,
            P, cfg["rtol"], cfg["atol"], np.inf,
        )
        kn.raise_for_status(status, "simulate")
        ts = np.arange(len(states)) * dt
    artifacts.write_csv(
        out / "trajectory.csv",
        ["t", "x", "y", "z"],
        ((t, s[0], s[1], s[2]) for t, s in zip(ts, states)),
    )
    artifacts.write_manifest(out, "simulate", cfg, {"n_samples": len(states)})
    return EXIT_OK


def cmd_map1d(cfg) -> int:
    out = cfgmod.outdir(cfg)
    orbit = map1d.iterate(
        cfg["x0"], cfg["n"], cfg["alpha"],
        noise_sigma=cfg["noise_sigma"], seed=cfg["rng_seed"],
    )
    eps = map1d.epochs_by_sign(orbit)
    hist = map1d.epoch_histogram(eps, bin_width=cfg["bin_width"])
    cov = map1d.pair_coverage(eps, cfg["pair_lo"], cfg["pair_hi"])
    if cfg["write_orbit"]:
        map1d.write_orbit_csv(out / "orbit.csv", orbit)
    map1d.write_epochs_csv(out / "epochs.csv", eps)
    map1d.write_histogram_csv(out / "histogram.csv", hist)
    map1d.write_pairs_csv(out / "pairs.csv", cov)
    lengths = [e.length for e in eps]
    artifacts.write_json(
        out / "stats.json",
        {
            "n_epochs": len(eps),
            "min_length": min(lengths),
            "max_length": max(lengths),
            "fit_slope": hist.slope,
            "fit_intercept": hist.intercept,
            "fit_r_squared": hist.r_squared,
            "pair_coverage": cov.coverage,
        },
    )
    artifacts.write_manifest(out, "map1d", cfg, {"n_epochs": len(eps)})
    return EXIT_OK


def cmd_basin(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    x_eq = analysis.equilibrium_x(p)
    grid = analysis.GridSpec(
        value=x_eq,
        u_range=(cfg["y_lo"], cfg["y_hi"]),
        v_range=(cfg["z_lo"], cfg["z_hi"]),
        nu=cfg["n"],
        nv=cfg["n"],
    )
    result = analysis.basin_grid(
        grid,
        p,
        cfg=_icfg(cfg),
        transient=cfg["transient"],
        window=cfg["window"],
        jobs=_jobs(cfg),
    )
    analysis.write_matrix_csv(out / "labels.csv", result.labels)
    analysis.write_grid_sidecar(
        out / "labels.json",
        grid,
        p,
        {
            "counts": result.counts(),
            "boundary_cells": analysis.boundary_cell_count(result.labels),
            "label_chars": analysis.LABEL_CHARS,
        },
    )
    artifacts.write_manifest(out, "basin", cfg, {"counts": result.counts()})
    return EXIT_OK


def cmd_ftle(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    x_eq = analysis.equilibrium_x(p)
    grid = analysis.GridSpec(
        value=x_eq,
        u_range=(cfg["y_lo"], cfg["y_hi"]),
        v_range=(cfg["z_lo"], cfg["z_hi"]),
        nu=cfg["n"],
        nv=cfg["n"],
    )
    field = analysis.ftle_grid(grid, p, T=cfg["horizon"], cfg=_icfg(cfg),
                               jobs=_jobs(cfg))
    analysis.write_matrix_csv(out / "ftle.csv", field)
    analysis.write_grid_sidecar(
        out / "ftle.json", grid, p, {"horizon": cfg["horizon"]}
    )
    artifacts.write_manifest(out, "ftle", cfg, {"max": float(np.nanmax(field))})
    return EXIT_OK


def cmd_returnmap(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    icfg = _icfg(cfg)
    # section cloud of the attractor reached from the seed (x = x_eq plane)
    x_eq = analysis.equilibrium_x(p)
    spec = sections.SectionSpec("x", x_eq, "increasing")
    crossings = sections.detect_crossings(
        _seed3(cfg), p, spec, t_max=cfg["t_max"], cfg=icfg,
        max_crossings=cfg["n_crossings"],
    )
    sections.write_crossings_csv(out / "crossings.csv", crossings)
    zs = np.array([c.state[2] for c in crossings])
    artifacts.write_csv(out / "zreturn.csv", ["z_n", "z_next"],
                        zip(zs[:-1], zs[1:]))
    # tabulated 1-D map on the manifold fold curve
    diag = analysis.analyze_1d_map(
        p, z_window=(cfg["z_lo"], cfg["z_hi"]), n_samples=cfg["n_samples"],
        cfg=icfg,
    )
    sections.write_map_csv(out / "map.csv", diag.z_in, diag.z_ret)
    artifacts.write_json(
        out / "map.json",
        {
            "a": diag.a,
            "fixed_points": [{"z": z, "slope": s} for z, s in diag.fixed_points],
            "z_at_min": diag.z_at_min,
            "min_value": diag.min_value,
            "image_of_min": diag.image_of_min,
            "horseshoe": diag.horseshoe,
        },
    )
    artifacts.write_manifest(out, "returnmap", cfg,
                             {"n_crossings": len(crossings)})
    return EXIT_OK


def cmd_crisis(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    result = analysis.crisis_bisection(
        p, (cfg["bracket_lo"], cfg["bracket_hi"]), tol=cfg["tol"], cfg=_icfg(cfg)
    )
    artifacts.write_csv(out / "probes.csv", ["a", "extent"], result.probes)
    artifacts.write_json(
        out / "crisis.json",
        {
            "param": result.param,
            "bracket": list(result.bracket),
            "critical": result.critical,
            "diagnostic": result.diagnostic,
        },
    )
    artifacts.write_manifest(out, "crisis", cfg, {"critical": result.critical})
    return EXIT_OK


def cmd_strip(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    rows = analysis.bistability_strip(
        cfg["deltas"],
        p,
        chaotic_bracket=(cfg["chaotic_lo"], cfg["chaotic_hi"]),
        sn_bracket=(cfg["sn_lo"], cfg["sn_hi"]),
        mmo_bracket=(cfg["mmo_lo"], cfg["mmo_hi"]),
        tol=cfg["tol"],
    )
    analysis.write_strip_csv(out / "strip.csv", rows)
    artifacts.write_manifest(out, "strip", cfg, {"n_deltas": len(rows)})
    if all(r["error"] for r in rows):
        return EXIT_NO_RESULT
    return EXIT_OK


def cmd_epochs(cfg) -> int:
    out = cfgmod.outdir(cfg)
    p = _params(cfg)
    eq = find_equilibrium(p, (-2.5, -0.8, 1.6))
    direction = eq.observable_direction
    forcing = Forcing(
        a0=p.a,
        amplitude=cfg["amplitude"],
        omega=cfg["omega"],
        noise_sigma=cfg["noise_sigma"],
        seed=cfg["rng_seed"],
    )
    s0 = _seed3(cfg)
    if forcing.noise_sigma > 0.0:
        P = kn.pack_params(p, forcing)
        every = max(1, int(round(cfg["sample_dt"] / cfg["noise_dt"])))
        g, status, *_ = kn.em_observable_k(
            s0[0], s0[1], s0[2], 0.0, cfg["years"], cfg["noise_dt"], every,
            direction[0], direction[1], direction[2],
            forcing.noise_sigma, forcing.noise_sigma, forcing.noise_sigma,
            forcing.seed, P,
        )
        kn.raise_for_status(status, "epochs (stochastic)")
        series = epochs.ObservableSeries(
            times=np.arange(g.size) * (cfg["noise_dt"] * every), values=g
        )
        crossings = epochs.downward_crossings(series, hi=cfg["hi"], lo=cfg["lo"])
        eplist = epochs.segment_epochs(
            crossings, series.span, min_gap=cfg["min_gap"], series=series,
            hi=cfg["hi"], lo=cfg["lo"],
        )
    else:
        series, crossings, eplist = epochs.run_switching(
            s0, cfg["years"], p, forcing, direction,
            dt=cfg["sample_dt"], hi=cfg["hi"], lo=cfg["lo"],
            min_gap=cfg["min_gap"], cfg=_icfg(cfg),
        )
    if cfg["write_series"]:
        epochs.write_series_csv(out / "gseries.csv", series)
    epochs.write_crossings_csv(out / "crossings.csv", crossings,
                               hi=cfg["hi"], lo=cfg["lo"])
    epochs.write_epochs_csv(out / "epochs.csv", eplist)
    n_chaotic = sum(1 for e in eplist if e.kind == "chaotic")
    n_mmo = len(eplist) - n_chaotic
    if n_chaotic == 0:
        # nothing switched: a report would be vacuous
        artifacts.write_manifest(out, "epochs", cfg,
                                 {"n_chaotic": 0, "n_mmo": n_mmo})
        raise NoEpochs("run contains no qualifying chaotic epoch")
    es = epochs.epoch_statistics(eplist, bin_width=cfg["bin_width"],
                                 cutoff=cfg["cutoff"])
    epochs.write_histogram_csv(out / "histogram.csv", es)
    epochs.write_scatter_csv(out / "scatter.csv", es)
    artifacts.write_json(
        out / "stats.json",
        {
            "n_epochs": len(eplist),
            "n_chaotic": n_chaotic,
            "n_mmo": n_mmo,
            "longest": max(e.duration for e in eplist),
            "fit_slope": es.slope,
            "fit_r_squared": es.r_squared,
            "rank_correlation": es.rank_correlation,
        },
    )
    artifacts.write_manifest(
        out, "epochs", cfg, {"n_chaotic": n_chaotic, "n_mmo": n_mmo}
    )
    return EXIT_OK


_COMMANDS = {
    "simulate": cmd_simulate,
    "map1d": cmd_map1d,
    "basin": cmd_basin,
    "ftle": cmd_ftle,
    "returnmap": cmd_returnmap,
    "crisis": cmd_crisis,
    "strip": cmd_strip,
    "epochs": cmd_epochs,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="jtenso",
        description="Simulation and analysis toolkit for a three-variable "
        "recharge-oscillator model.",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name in _COMMANDS:
        sp = sub.add_parser(name, help=f"run the {name} experiment")
        sp.add_argument("--config", help="flat TOML config file")
        sp.add_argument("--out", help="output directory (overrides config)")
        sp.add_argument(
            "--jobs", type=int, help="worker processes for grid commands"
        )
        sp.add_argument(
            "--set",
            action="append",
            default=[],
            metavar="KEY=VALUE",
            help="override one config key (repeatable)",
        )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        data = cfgmod.load_file(args.config) if args.config else {}
        overrides = {}
        for item in args.set:
            key, value = cfgmod.parse_override(args.command, item)
            overrides[key] = value
        if args.out:
            overrides["out"] = args.out
        if args.jobs is not None:
            if not any(f.name == "jobs" for f in cfgmod.SCHEMAS[args.command]):
                raise ConfigError(f"{args.command} does not take --jobs")
            overrides["jobs"] = args.jobs
        cfg = cfgmod.resolve(args.command, data, overrides)
        return _COMMANDS[args.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except ValueError as exc:
        # bad argument values surfacing from library-level validation
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except NoEpochs as exc:
        print(f"no result: {exc}", file=sys.stderr)
        return EXIT_NO_RESULT
    except NumericsError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICS
    except ToolkitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICS


if __name__ == "__main__":
    sys.exit(main())
