"""Mode-switching analysis of forced runs.

A forced run wanders between two regimes: quiet spans of small fast
oscillations and spans punctuated by strong events. The scalar observable
g(s) = direction . s, with direction the unit normal of the equilibrium's
complex eigenplane, separates them: during quiet spans g oscillates in a
narrow band between the two thresholds, while strong events swing it
through both. Segmentation is threshold-based: a downward crossing of the
high threshold followed, more than min_gap later, by a downward crossing
of the low threshold brackets a quiet ("chaotic") epoch; everything else
is a strong-event ("MMO") epoch.

This implements exactly that bracketing heuristic. Short chaotic-looking
interludes that never open a qualifying gap are deliberately not detected;
the heuristic has no opinion about them.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import kernels as kn
from .errors import ConfigError, NoEpochs
from .integrators import IntegratorConfig
from .model import Forcing, ModelParams
from .presets import SWITCH_HI, SWITCH_LO, SWITCH_MIN_GAP

# sampling interval for the observable: fine enough that linear
# interpolation of threshold crossings is far below epoch time scales
SAMPLE_DT = 0.02


@dataclass(frozen=True)
class ObservableSeries:
    """Uniformly sampled scalar observable along a trajectory."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        if self.times.shape != self.values.shape:
            raise ConfigError("times and values must have matching shapes")

    @property
    def span(self) -> tuple:
        return float(self.times[0]), float(self.times[-1])


@dataclass(frozen=True)
class Epoch:
    kind: str  # "chaotic" | "MMO"
    start: float
    end: float

    @property
    def duration(self) -> float:
        return self.end - self.start


def observable_series(traj, direction) -> ObservableSeries:
    """Project a Trajectory's samples onto a unit direction."""
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-8:
        raise ConfigError("direction must be a unit vector")
    return ObservableSeries(
        times=np.asarray(traj.times, dtype=float),
        values=np.asarray(traj.states, dtype=float) @ d,
    )


def sample_observable(
    s0,
    years: float,
    p: ModelParams,
    direction,
    forcing: Forcing | None = None,
    dt: float = SAMPLE_DT,
    cfg: IntegratorConfig | None = None,
) -> ObservableSeries:
    """Integrate and project in one pass (no trajectory storage).

    The compiled kernel records g = direction . s on a uniform dt grid,
    which keeps 100,000-year runs in memory comfortably.
    """
    if cfg is None:
        cfg = IntegratorConfig()
    d = np.asarray(direction, dtype=float)
    if abs(np.linalg.norm(d) - 1.0) > 1e-8:
        raise ConfigError("direction must be a unit vector")
    s0 = np.asarray(s0, dtype=float)
    P = kn.pack_params(p, forcing)
    g, status, _x, _y, _z = kn.sample_observable_k(
        s0[0],
        s0[1],
        s0[2],
        0.0,
        float(years),
        float(dt),
        d[0],
        d[1],
        d[2],
        P,
        cfg.rtol,
        cfg.atol,
        cfg.max_step,
    )
    kn.raise_for_status(status, "sample_observable")
    return ObservableSeries(times=np.arange(g.size) * dt, values=g)


def downward_crossings(
    series: ObservableSeries, hi: float = SWITCH_HI, lo: float = SWITCH_LO
):
    """Times where g decreases through each threshold (linear interpolation)."""
    if not hi > lo:
        raise ConfigError("need hi > lo")
    return (
        _down_times(series.times, series.values, hi),
        _down_times(series.times, series.values, lo),
    )


def _down_times(ts, g, level):
    prev, cur = g[:-1], g[1:]
    hit = (prev > level) & (cur <= level)
    idx = np.flatnonzero(hit)
    frac = (prev[idx] - level) / (prev[idx] - cur[idx])
    return ts[idx] + frac * (ts[idx + 1] - ts[idx])


def segment_epochs(
    crossings,
    span,
    min_gap: float = SWITCH_MIN_GAP,
    series: ObservableSeries | None = None,
    hi: float = SWITCH_HI,
    lo: float = SWITCH_LO,
) -> list[Epoch]:
    """Epochs tiling [t0, t1] from (hi_times, lo_times) downward crossings.

    Each hi-crossing is paired with the next lo-crossing; pairs whose gap
    exceeds min_gap bracket chaotic epochs and the complement is MMO.
    With no qualifying pair the whole span is one epoch: chaotic when the
    series is available and never leaves the open (lo, hi) band (the
    quiet-regime signature), MMO otherwise.
    """
    hi_t, lo_t = (np.asarray(c, dtype=float) for c in crossings)
    t0, t1 = float(span[0]), float(span[1])
    if not t1 > t0:
        raise NoEpochs(f"empty analysis span [{t0}, {t1}]")
    pairs = []
    j = 0
    tcur = t0
    for th in hi_t:
        if th < tcur:
            continue
        while j < lo_t.size and lo_t[j] <= th:
            j += 1
        if j >= lo_t.size:
            break
        tl = lo_t[j]
        if tl - th > min_gap:
            pairs.append((th, tl))
            tcur = tl
    if not pairs:
        quiet = (
            series is not None
            and series.values.min() > lo
            and series.values.max() < hi
        )
        return [Epoch("chaotic" if quiet else "MMO", t0, t1)]
    epochs = []
    prev = t0
    for th, tl in pairs:
        if th > prev:
            epochs.append(Epoch("MMO", prev, th))
        epochs.append(Epoch("chaotic", th, tl))
        prev = tl
    if prev < t1:
        epochs.append(Epoch("MMO", prev, t1))
    return epochs


@dataclass(frozen=True)
class EpochStatistics:
    """Duration histogram with fit, plus successive-pair dependence."""

    bin_width: float
    cutoff: float
    centers: np.ndarray  # occupied bins only
    counts: np.ndarray
    slope: float
    intercept: float
    r_squared: float
    scatter: np.ndarray  # (n-1, 2) successive duration pairs
    rank_correlation: float


def epoch_statistics(
    epochs, bin_width: float = 10.0, cutoff: float = 400.0
) -> EpochStatistics:
    """Histogram durations below cutoff and fit ln(count) linearly.

    Also pairs successive durations (d_i, d_i+1) - of any kinds, in time
    order - and reports their Spearman rank correlation. Needs >= 2 epochs.
    """
    if len(epochs) < 2:
        raise NoEpochs(f"need >= 2 epochs for statistics, got {len(epochs)}")
    d = np.array([e.duration for e in epochs], dtype=float)
    edges = np.arange(0.0, cutoff + bin_width, bin_width)
    counts, edges = np.histogram(d[d < cutoff], bins=edges)
    occupied = counts > 0
    centers = (0.5 * (edges[:-1] + edges[1:]))[occupied]
    counts = counts[occupied]
    if centers.size >= 2:
        fit = stats.linregress(centers, np.log(counts.astype(float)))
        slope, intercept, r2 = fit.slope, fit.intercept, fit.rvalue**2
    else:
        slope, intercept, r2 = 0.0, 0.0, 1.0
    scatter = np.column_stack([d[:-1], d[1:]])
    # rank correlation is undefined for < 3 pairs or a constant margin
    varied = np.unique(d[:-1]).size > 1 and np.unique(d[1:]).size > 1
    if d.size >= 3 and varied:
        rho = stats.spearmanr(d[:-1], d[1:]).statistic
    else:
        rho = np.nan
    return EpochStatistics(
        bin_width=float(bin_width),
        cutoff=float(cutoff),
        centers=centers,
        counts=counts,
        slope=float(slope),
        intercept=float(intercept),
        r_squared=float(r2),
        scatter=scatter,
        rank_correlation=float(rho),
    )


def run_switching(
    s0,
    years: float,
    p: ModelParams,
    forcing: Forcing,
    direction,
    dt: float = SAMPLE_DT,
    hi: float = SWITCH_HI,
    lo: float = SWITCH_LO,
    min_gap: float = SWITCH_MIN_GAP,
    cfg: IntegratorConfig | None = None,
):
    """One forced run end to end: series, crossings, epochs.

    Returns (series, (hi_times, lo_times), epochs).
    """
    series = sample_observable(s0, years, p, direction, forcing=forcing, dt=dt,
                               cfg=cfg)
    crossings = downward_crossings(series, hi=hi, lo=lo)
    epochs = segment_epochs(
        crossings, series.span, min_gap=min_gap, series=series, hi=hi, lo=lo
    )
    return series, crossings, epochs


# ---------------------------------------------------------------------------
# artifact writers


def write_series_csv(path, series: ObservableSeries):
    from .artifacts import write_csv

    return write_csv(path, ["t", "g"], zip(series.times, series.values))


def write_crossings_csv(path, crossings, hi: float = SWITCH_HI, lo: float = SWITCH_LO):
    from .artifacts import write_csv

    hi_t, lo_t = crossings
    rows = sorted(
        [(float(t), hi) for t in hi_t] + [(float(t), lo) for t in lo_t]
    )
    return write_csv(path, ["t", "threshold"], rows)


def write_epochs_csv(path, epochs):
    from .artifacts import write_csv

    rows = ((e.kind, e.start, e.end, e.duration) for e in epochs)
    return write_csv(path, ["kind", "start", "end", "duration"], rows)


def write_histogram_csv(path, es: EpochStatistics):
    from .artifacts import write_csv

    return write_csv(path, ["duration", "count"], zip(es.centers, es.counts))


def write_scatter_csv(path, es: EpochStatistics):
    from .artifacts import write_csv

    return write_csv(path, ["d_i", "d_next"], (tuple(r) for r in es.scatter))
