"""The cubic interval map g(x) = alpha*x*(1 - x^2) and its epoch statistics.

For 2 < alpha < 3*sqrt(3)/2 the map has two disjoint attractors, one in
(0, 1] and its mirror image in [-1, 0). At alpha = 3*sqrt(3)/2 the maximum
of g on [0, 1], attained at x = 1/sqrt(3), reaches 1 exactly and the two
attractors merge; beyond that an orbit switches sign at irregular times.
Runs of constant sign ("epochs") are the object of study here: their
length distribution is close to exponential and successive lengths look
independent.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numba import njit

from .errors import ZeroIterate

# alpha at which max g on [0,1] = g(1/sqrt(3)) = 2*alpha/(3*sqrt(3)) hits 1
MERGE_ALPHA = 1.5 * np.sqrt(3.0)


def cubic_map(x, alpha: float):
    """One application of g; accepts scalars or arrays."""
    x = np.asarray(x, dtype=float)
    out = alpha * x * (1.0 - x * x)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class MapOrbit:
    """An iterate sequence with the settings that produced it."""

    alpha: float
    x0: float
    values: np.ndarray
    noise_sigma: float = 0.0
    seed: int = 0

    def __len__(self):
        return len(self.values)


@dataclass(frozen=True)
class EpochRecord:
    """A maximal constant-sign run of iterates."""

    start_index: int
    length: int
    sign: int


@njit(cache=True)
def _iterate_k(x0, n, alpha):
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    for i in range(1, n + 1):
        x = alpha * x * (1.0 - x * x)
        out[i] = x
    return out


@njit(cache=True)
def _iterate_noisy_k(x0, n, alpha, sigma, seed):
    np.random.seed(seed)
    out = np.empty(n + 1)
    out[0] = x0
    x = x0
    for i in range(1, n + 1):
        x = alpha * x * (1.0 - x * x) + sigma * np.random.standard_normal()
        out[i] = x
    return out


def iterate(
    x0: float, n: int, alpha: float, noise_sigma: float = 0.0, seed: int = 0
) -> MapOrbit:
    """Orbit of length n+1 starting at x0; values[0] == x0.

    With noise_sigma > 0 each step adds sigma*xi with xi standard normal
    from a generator seeded by `seed`, so stochastic orbits are exactly
    reproducible too.
    """
    if n < 1:
        raise ValueError("need at least one iterate")
    if not np.isfinite(x0):
        raise ValueError("x0 must be finite")
    if noise_sigma < 0:
        raise ValueError("noise_sigma must be nonnegative")
    if noise_sigma == 0.0:
        values = _iterate_k(float(x0), int(n), float(alpha))
    else:
        values = _iterate_noisy_k(
            float(x0), int(n), float(alpha), float(noise_sigma), int(seed)
        )
    return MapOrbit(
        alpha=float(alpha),
        x0=float(x0),
        values=values,
        noise_sigma=float(noise_sigma),
        seed=int(seed),
    )


def epochs_by_sign(orbit: MapOrbit) -> list[EpochRecord]:
    """Maximal constant-sign runs covering the whole orbit.

    An exact zero after index 0 means the orbit hit the invariant fixed
    point at the origin, where sign epochs stop being defined; that raises
    ZeroIterate rather than silently assigning a sign. A zero at index 0
    alone (possible for noisy orbits) joins the first run.
    """
    values = orbit.values if isinstance(orbit, MapOrbit) else np.asarray(orbit)
    s = np.sign(values)
    zeros = np.flatnonzero(s[1:] == 0.0)
    if zeros.size:
        idx = int(zeros[0] + 1)
        raise ZeroIterate(f"orbit value at index {idx} is exactly zero", index=idx)
    if s[0] == 0.0:
        if s.size == 1:
            raise ZeroIterate("single-point orbit at exactly zero", index=0)
        s[0] = s[1]
    switch = np.flatnonzero(s[1:] != s[:-1]) + 1
    starts = np.concatenate(([0], switch))
    ends = np.concatenate((switch, [s.size]))
    return [
        EpochRecord(start_index=int(a), length=int(b - a), sign=int(s[a]))
        for a, b in zip(starts, ends)
    ]


@dataclass(frozen=True)
class EpochHistogram:
    """Occupied length-bins plus a log-linear least-squares fit."""

    bin_width: int
    lengths: np.ndarray  # representative length per occupied bin
    counts: np.ndarray
    slope: float
    intercept: float
    r_squared: float


def epoch_histogram(epochs, bin_width: int = 1) -> EpochHistogram:
    """Histogram of epoch lengths with a straight-line fit to ln(count).

    Only occupied bins enter the fit; natural-log counts, unweighted
    least squares. With bin_width 1 the representative length of a bin is
    the length itself.
    """
    if not epochs:
        raise ValueError("no epochs to histogram")
    if bin_width < 1:
        raise ValueError("bin_width must be >= 1")
    lens = np.array([e.length for e in epochs], dtype=np.int64)
    idx = (lens - 1) // bin_width
    counts_all = np.bincount(idx)
    occ = np.flatnonzero(counts_all > 0)
    counts = counts_all[occ].astype(np.int64)
    # mean of the integer lengths a bin can hold
    lengths = occ * bin_width + (bin_width + 1) / 2.0
    if bin_width == 1:
        lengths = occ.astype(float) + 1.0
    y = np.log(counts.astype(float))
    if occ.size >= 2:
        design = np.column_stack([lengths, np.ones_like(lengths)])
        coef, *_ = np.linalg.lstsq(design, y, rcond=None)
        yhat = design @ coef
        ss_res = float(np.sum((y - yhat) ** 2))
        ss_tot = float(np.sum((y - y.mean()) ** 2))
        r2 = 1.0 if ss_tot == 0.0 else 1.0 - ss_res / ss_tot
        slope, intercept = float(coef[0]), float(coef[1])
    else:
        slope, intercept, r2 = 0.0, float(y[0]), 1.0
    return EpochHistogram(
        bin_width=int(bin_width),
        lengths=lengths,
        counts=counts,
        slope=slope,
        intercept=intercept,
        r_squared=float(r2),
    )


@dataclass(frozen=True)
class PairCoverage:
    """Successive-length pairs (d_i, d_i+1) tallied on [lo, hi]^2."""

    lo: int
    hi: int
    pairs: dict  # (m, n) -> count
    coverage: float


def pair_coverage(epochs, lo: int, hi: int) -> PairCoverage:
    """Fraction of the (m, n) grid hit by successive epoch-length pairs."""
    if hi < lo:
        raise ValueError("need hi >= lo")
    lens = np.array([e.length for e in epochs], dtype=np.int64)
    pairs: dict = {}
    if lens.size >= 2:
        m, n = lens[:-1], lens[1:]
        sel = (m >= lo) & (m <= hi) & (n >= lo) & (n <= hi)
        for mm, nn in zip(m[sel].tolist(), n[sel].tolist()):
            pairs[(mm, nn)] = pairs.get((mm, nn), 0) + 1
    total = (hi - lo + 1) ** 2
    return PairCoverage(
        lo=int(lo), hi=int(hi), pairs=pairs, coverage=len(pairs) / total
    )


# ---------------------------------------------------------------------------
# CSV artifact writers (schemas consumed by the plotting component)


def write_orbit_csv(path, orbit: MapOrbit):
    from .artifacts import write_csv

    rows = ((i, v) for i, v in enumerate(orbit.values))
    return write_csv(path, ["n", "x"], rows)


def write_epochs_csv(path, epochs):
    from .artifacts import write_csv

    rows = ((e.start_index, e.length, e.sign) for e in epochs)
    return write_csv(path, ["start", "length", "sign"], rows)


def write_histogram_csv(path, hist: EpochHistogram):
    from .artifacts import write_csv

    rows = zip(hist.lengths, hist.counts)
    return write_csv(path, ["length", "count"], rows)


def write_pairs_csv(path, cov: PairCoverage):
    from .artifacts import write_csv

    rows = ((m, n, c) for (m, n), c in sorted(cov.pairs.items()))
    return write_csv(path, ["m", "n", "count"], rows)
