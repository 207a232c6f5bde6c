"""One renderer per figure id.

Each renderer reads its artifacts, draws the layout, writes one image,
and returns the matplotlib Figure (tests inspect axes without reopening
the file). Inputs per figure are fixed relative paths under one artifact
root, manifests included, and every input must exist before any drawing
starts.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import ListedColormap
from matplotlib.patches import Patch

from .io import ArtifactError, char_matrix, load_json, matrix, numeric, read_columns

# relative input paths per figure id; subdirectory = the CLI run that
# produced the artifact
INPUTS: dict[int, tuple[str, ...]] = {
    1: ("map1d/orbit.csv", "map1d/histogram.csv", "map1d/manifest.json"),
    2: (
        "simulate_chaotic/trajectory.csv",
        "simulate_chaotic/manifest.json",
        "simulate_mmo/trajectory.csv",
        "simulate_mmo/manifest.json",
    ),
    3: ("returnmap/crossings.csv", "returnmap/manifest.json"),
    4: ("basin/labels.csv", "basin/labels.json", "basin/manifest.json"),
    5: ("ftle/ftle.csv", "ftle/ftle.json", "ftle/manifest.json"),
    6: (
        "returnmap/zreturn.csv",
        "returnmap/map.csv",
        "returnmap/map.json",
        "returnmap/manifest.json",
    ),
    7: (
        "epochs/gseries.csv",
        "epochs/crossings.csv",
        "epochs/epochs.csv",
        "epochs/manifest.json",
    ),
    8: ("epochs/histogram.csv", "epochs/scatter.csv", "epochs/manifest.json"),
}

OUTPUT_NAMES = {
    1: "fig1_map_dynamics.png",
    2: "fig2_phase_portraits.png",
    3: "fig3_section_cloud.png",
    4: "fig4_basin_map.png",
    5: "fig5_stretch_field.png",
    6: "fig6_return_maps.png",
    7: "fig7_forced_series.png",
    8: "fig8_epoch_statistics.png",
}

FIGURE_IDS = tuple(sorted(INPUTS))


@dataclass(frozen=True)
class FigureSpec:
    figure_id: int
    artifacts: Path
    output: Path

    def __post_init__(self):
        if self.figure_id not in INPUTS:
            raise ArtifactError(
                f"unknown figure id {self.figure_id}; know {FIGURE_IDS}"
            )

    def inputs(self) -> tuple[Path, ...]:
        return tuple(self.artifacts / rel for rel in INPUTS[self.figure_id])

    def validate(self) -> None:
        missing = [str(p) for p in self.inputs() if not p.is_file()]
        if missing:
            raise ArtifactError("missing artifact(s): " + ", ".join(missing))


def spec_for(figure_id: int, artifacts, out_dir) -> FigureSpec:
    return FigureSpec(
        figure_id=int(figure_id),
        artifacts=Path(artifacts),
        output=Path(out_dir) / OUTPUT_NAMES.get(int(figure_id), "fig.png"),
    )


def render(spec: FigureSpec):
    """Validate inputs, draw, save, and return the figure."""
    spec.validate()
    fig = _RENDERERS[spec.figure_id](spec)
    spec.output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(spec.output, dpi=150, bbox_inches="tight")
    plt.close(fig)
    return fig


# ---------------------------------------------------------------------------
# renderers


def _fig_map_dynamics(spec):
    orbit = read_columns(spec.artifacts / "map1d/orbit.csv")
    hist = read_columns(spec.artifacts / "map1d/histogram.csv")
    n = numeric(orbit, "n", "orbit.csv")
    x = numeric(orbit, "x", "orbit.csv")
    lengths = numeric(hist, "length", "histogram.csv")
    counts = numeric(hist, "count", "histogram.csv")

    fig, (ax_orbit, ax_hist) = plt.subplots(1, 2, figsize=(10, 4))
    show = slice(0, min(400, n.size))
    ax_orbit.plot(n[show], x[show], lw=0.7, color="tab:blue")
    ax_orbit.axhline(0.0, color="0.6", lw=0.6)
    ax_orbit.set_xlabel("iterate")
    ax_orbit.set_ylabel("x")
    ax_orbit.set_title("orbit segment")

    # counts decay roughly exponentially, so the log axis is the readable one
    ax_hist.bar(lengths, counts, width=0.9, color="tab:orange")
    ax_hist.set_yscale("log")
    ax_hist.set_xlabel("epoch length")
    ax_hist.set_ylabel("count")
    ax_hist.set_title("epoch length distribution")
    fig.tight_layout()
    return fig


def _fig_phase_portraits(spec):
    runs = [
        ("simulate_chaotic/trajectory.csv", "run A (no events)"),
        ("simulate_mmo/trajectory.csv", "run B (recurring events)"),
    ]
    fig, axes = plt.subplots(1, 2, figsize=(10, 4))
    for ax, (rel, label) in zip(axes, runs):
        cols = read_columns(spec.artifacts / rel)
        x = numeric(cols, "x", rel)
        z = numeric(cols, "z", rel)
        ax.plot(x, z, lw=0.4, color="tab:blue")
        ax.set_xlabel("x")
        ax.set_ylabel("z")
        ax.set_title(label)
    fig.tight_layout()
    return fig


def _fig_section_cloud(spec):
    rel = "returnmap/crossings.csv"
    cols = read_columns(spec.artifacts / rel)
    y = numeric(cols, "y", rel)
    z = numeric(cols, "z", rel)
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    ax.plot(y, z, ".", ms=2.0, color="tab:blue")
    ax.set_xlabel("y")
    ax.set_ylabel("z")
    ax.set_title("section crossings")
    fig.tight_layout()
    return fig


def _fig_basin_map(spec):
    labels = char_matrix(spec.artifacts / "basin/labels.csv")
    side = load_json(spec.artifacts / "basin/labels.json")
    chars = side.get("label_chars", {})
    grid = side.get("grid", {})
    u_lo, u_hi = grid.get("u_range", (0.0, 1.0))
    v_lo, v_hi = grid.get("v_range", (0.0, 1.0))

    kinds = sorted(chars, key=lambda k: chars[k])
    present = [k for k in kinds if np.any(labels == chars[k])]
    palette = {"C": "#2166ac", "M": "#b2182b", "P": "#66bd63",
               "D": "#999999", "U": "#f4e8c1"}
    codes = np.zeros(labels.shape, dtype=int)
    colors = []
    for i, kind in enumerate(present):
        codes[labels == chars[kind]] = i
        colors.append(palette.get(chars[kind], "#000000"))

    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    # rows index u (y), so transpose to put u on the horizontal axis
    ax.imshow(
        codes.T,
        origin="lower",
        extent=(u_lo, u_hi, v_lo, v_hi),
        aspect="auto",
        cmap=ListedColormap(colors if colors else ["#000000"]),
        interpolation="nearest",
    )
    ax.set_xlabel("y")
    ax.set_ylabel("z")
    ax.set_title("attractor reached per initial section point")
    ax.legend(
        handles=[
            Patch(color=palette.get(chars[k], "#000000"), label=k)
            for k in present
        ],
        loc="upper right",
        fontsize=8,
    )
    fig.tight_layout()
    return fig


def _fig_stretch_field(spec):
    field = matrix(spec.artifacts / "ftle/ftle.csv")
    side = load_json(spec.artifacts / "ftle/ftle.json")
    grid = side.get("grid", {})
    u_lo, u_hi = grid.get("u_range", (0.0, 1.0))
    v_lo, v_hi = grid.get("v_range", (0.0, 1.0))

    fig, ax = plt.subplots(figsize=(6.5, 4.0))
    im = ax.imshow(
        field.T,
        origin="lower",
        extent=(u_lo, u_hi, v_lo, v_hi),
        aspect="auto",
        cmap="magma",
        interpolation="nearest",
    )
    # cell values are already base-10 logs of the stretch factor
    cbar = fig.colorbar(im, ax=ax)
    cbar.set_label(f"log10 stretch over horizon {side.get('horizon', '?')}")
    ax.set_xlabel("y")
    ax.set_ylabel("z")
    ax.set_title("finite-horizon stretching (log10 scale)")
    fig.tight_layout()
    return fig


def _fig_return_maps(spec):
    zret = read_columns(spec.artifacts / "returnmap/zreturn.csv")
    zmap = read_columns(spec.artifacts / "returnmap/map.csv")
    diag = load_json(spec.artifacts / "returnmap/map.json")
    z_n = numeric(zret, "z_n", "zreturn.csv")
    z_next = numeric(zret, "z_next", "zreturn.csv")
    z_in = numeric(zmap, "z_in", "map.csv")
    z_out = numeric(zmap, "z_ret", "map.csv")

    fig, (ax_cloud, ax_map) = plt.subplots(1, 2, figsize=(10, 4))
    ax_cloud.plot(z_n, z_next, ".", ms=2.5, color="tab:blue")
    lo, hi = ax_cloud.get_xlim()
    ax_cloud.plot([lo, hi], [lo, hi], "--", color="0.6", lw=0.8)
    ax_cloud.set_xlabel("z at crossing n")
    ax_cloud.set_ylabel("z at crossing n+1")
    ax_cloud.set_title("successive crossings")

    order = np.argsort(z_in)
    ax_map.plot(z_in[order], z_out[order], "-o", ms=3, color="tab:orange")
    span = (min(z_in.min(), z_out.min()), max(z_in.max(), z_out.max()))
    ax_map.plot(span, span, "--", color="0.6", lw=0.8)
    for fp in diag.get("fixed_points", []):
        ax_map.plot(fp["z"], fp["z"], "k*", ms=10)
    ax_map.set_xlabel("z in")
    ax_map.set_ylabel("z after one return")
    ax_map.set_title(f"tabulated map at a={diag.get('a', '?')}")
    fig.tight_layout()
    return fig


def _fig_forced_series(spec):
    series = read_columns(spec.artifacts / "epochs/gseries.csv")
    crossings = read_columns(spec.artifacts / "epochs/crossings.csv")
    epochs = read_columns(spec.artifacts / "epochs/epochs.csv")
    t = numeric(series, "t", "gseries.csv")
    g = numeric(series, "g", "gseries.csv")
    kinds = epochs.get("kind", [])
    if len(kinds) == 0:
        raise ArtifactError("epochs.csv has no epochs; nothing to draw")
    starts = numeric(epochs, "start", "epochs.csv")
    ends = numeric(epochs, "end", "epochs.csv")

    fig, ax = plt.subplots(figsize=(10, 3.5))
    shade = {"chaotic": "#d6e4f0", "MMO": "#f7d6d0"}
    seen = set()
    for kind, s, e in zip(kinds, starts, ends):
        label = kind if kind not in seen else None
        seen.add(kind)
        ax.axvspan(s, e, color=shade.get(kind, "#eeeeee"), lw=0, label=label)
    ax.plot(t, g, lw=0.5, color="tab:blue")
    for level in sorted(set(numeric(crossings, "threshold", "crossings.csv"))):
        ax.axhline(level, color="0.3", lw=0.8, ls="--")
    ax.set_xlabel("t (years)")
    ax.set_ylabel("g")
    ax.set_title("forced run with epoch segmentation")
    ax.legend(loc="upper right", fontsize=8)
    fig.tight_layout()
    return fig


def _fig_epoch_statistics(spec):
    hist = read_columns(spec.artifacts / "epochs/histogram.csv")
    scatter = read_columns(spec.artifacts / "epochs/scatter.csv")
    durations = numeric(hist, "duration", "histogram.csv")
    counts = numeric(hist, "count", "histogram.csv")
    if durations.size == 0:
        raise ArtifactError("histogram.csv has no bins; nothing to draw")
    d_i = numeric(scatter, "d_i", "scatter.csv")
    d_next = numeric(scatter, "d_next", "scatter.csv")

    fig, (ax_hist, ax_pairs) = plt.subplots(1, 2, figsize=(10, 4))
    width = 0.9 * (np.min(np.diff(np.sort(durations))) if durations.size > 1
                   else 1.0)
    ax_hist.bar(durations, counts, width=width, color="tab:blue")
    ax_hist.set_yscale("log")
    ax_hist.set_xlabel("epoch duration (years)")
    ax_hist.set_ylabel("count")
    ax_hist.set_title("duration distribution")

    ax_pairs.plot(d_i, d_next, ".", ms=4, color="tab:orange")
    ax_pairs.set_xlabel("duration i")
    ax_pairs.set_ylabel("duration i+1")
    ax_pairs.set_title("successive durations")
    fig.tight_layout()
    return fig


_RENDERERS = {
    1: _fig_map_dynamics,
    2: _fig_phase_portraits,
    3: _fig_section_cloud,
    4: _fig_basin_map,
    5: _fig_stretch_field,
    6: _fig_return_maps,
    7: _fig_forced_series,
    8: _fig_epoch_statistics,
}
