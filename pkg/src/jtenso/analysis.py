"""Stretching fields, basin grids, attractor labels, and crisis location.

Everything here reduces to long batches of independent initial-value
problems, so the grid operations run their compiled kernels over row
chunks in a process pool; results are merged by index and are identical
for any worker count.

Labels come from cheap trajectory evidence rather than Lyapunov exponents:
strong events are upward crossings of x = event_level, periodicity is
recurrence of return-plane z values (period up to 8, tolerance 1e-4), and
divergence is a norm guard. The mapping from evidence to label kind is
frozen; see classify_attractor.
"""

from __future__ import annotations

import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import kernels as kn
from .errors import InvalidBracket, NoReturn
from .integrators import IntegratorConfig
from .model import ModelParams, find_equilibrium
from .presets import (
    CHAOTIC_SEED,
    EVENT_LEVEL,
    MAP1D_Z_WINDOW,
    MAP1D_Z_WINDOW_WIDE,
    X_EQ,
)
from .sections import SectionSpec, detect_crossings, seed_unstable_manifold

# default settle/observe horizon for classification (about 40 strong-event
# periods, empirically enough for basin settling at desk scale)
TRANSIENT = 500.0
WINDOW = 500.0

_EQ_GUESS = (-2.5, -0.8, 1.6)


@dataclass(frozen=True)
class GridSpec:
    """A rectangular grid on a coordinate plane.

    coordinate/value fix the plane; u spans the first free coordinate in
    (x, y, z) order and v the second (so on an x-plane, u is y and v is z).
    """

    value: float
    u_range: tuple
    v_range: tuple
    nu: int
    nv: int
    coordinate: str = "x"

    def __post_init__(self):
        if self.nu < 2 or self.nv < 2:
            raise ValueError("grid needs at least 2 points per axis")
        span = (*self.u_range, *self.v_range, self.value)
        if not all(np.isfinite(v) for v in span):
            raise ValueError("grid ranges must be finite")

    def axes(self):
        us = np.linspace(self.u_range[0], self.u_range[1], self.nu)
        vs = np.linspace(self.v_range[0], self.v_range[1], self.nv)
        return us, vs

    def describe(self) -> dict:
        return {
            "coordinate": self.coordinate,
            "value": self.value,
            "u_range": list(self.u_range),
            "v_range": list(self.v_range),
            "nu": self.nu,
            "nv": self.nv,
        }


@dataclass(frozen=True)
class AttractorLabel:
    """A label plus the evidence that produced it."""

    kind: str  # MMO | chaotic | periodic-non-MMO | divergent | undecided
    max_x: float
    n_events: int
    n_small_max: int
    period: int
    diverged: bool
    mean_gap: float


LABEL_CHARS = {
    "chaotic": "C",
    "MMO": "M",
    "periodic-non-MMO": "P",
    "divergent": "D",
    "undecided": "U",
}


def _kind_from_evidence(max_x, n_events, period, diverged, status, event_level):
    if status != kn.STATUS_OK or diverged:
        return "divergent"
    if n_events >= 2:
        return "MMO"
    if n_events == 1:
        return "undecided"
    if max_x < event_level:
        return "periodic-non-MMO" if period > 0 else "chaotic"
    return "undecided"


def _tols(cfg):
    if cfg is None:
        cfg = IntegratorConfig()
    return cfg.rtol, cfg.atol, cfg.max_step


def equilibrium_x(p: ModelParams) -> float:
    """x of the interior equilibrium (the recurrence/section plane)."""
    return float(find_equilibrium(p, _EQ_GUESS).state[0])


def ftle(s0, T: float, p: ModelParams, cfg: IntegratorConfig | None = None) -> float:
    """log10 of the largest singular value of the fundamental matrix M(T)."""
    if T < 0:
        raise ValueError("T must be nonnegative")
    rtol, atol, max_step = _tols(cfg)
    s0 = np.asarray(s0, dtype=float)
    P = kn.pack_params(p, None)
    Y, status = kn.var_final_k(s0[0], s0[1], s0[2], float(T), P, rtol, atol, max_step)
    kn.raise_for_status(status, "ftle")
    sig = kn._sigma_max(Y)
    return float(np.log10(sig)) if sig > 0.0 else float("-inf")


def classify_attractor(
    s0,
    p: ModelParams,
    cfg: IntegratorConfig | None = None,
    transient: float = TRANSIENT,
    window: float = WINDOW,
    event_level: float = EVENT_LEVEL,
    section_value: float | None = None,
) -> AttractorLabel:
    """Label the attractor reached from s0 after a settling transient.

    Frozen evidence-to-label mapping: integration failure or a norm blowup
    is divergent; two or more strong events is MMO; exactly one is
    undecided (the window caught a transient event); zero events with the
    whole window below event_level splits on return-plane recurrence into
    periodic-non-MMO (period found) versus chaotic; anything else is
    undecided.
    """
    rtol, atol, max_step = _tols(cfg)
    if section_value is None:
        section_value = equilibrium_x(p)
    s0 = np.asarray(s0, dtype=float)
    P = kn.pack_params(p, None)
    max_x, n_events, n_small, period, diverged, mean_gap, status = kn.evidence_k(
        s0[0],
        s0[1],
        s0[2],
        float(transient),
        float(window),
        P,
        rtol,
        atol,
        max_step,
        float(event_level),
        float(section_value),
        False,
    )
    kind = _kind_from_evidence(max_x, n_events, period, diverged, status, event_level)
    return AttractorLabel(
        kind=kind,
        max_x=float(max_x),
        n_events=int(n_events),
        n_small_max=int(n_small),
        period=int(period),
        diverged=bool(diverged),
        mean_gap=float(mean_gap),
    )


# ---------------------------------------------------------------------------
# grids in a process pool

_GRID_KIND_BASIN = 0
_GRID_KIND_FTLE = 1


def _grid_rows(args):
    (kind, us, vs, plane, p1, p2, P, rtol, atol, max_step, p5, p6) = args
    if kind == _GRID_KIND_BASIN:
        return kn.basin_evidence_grid_k(
            us, vs, plane, p1, p2, P, rtol, atol, max_step, p5, p6
        )
    return kn.ftle_grid_k(us, vs, plane, p1, P, rtol, atol, max_step)


def _run_grid(kind, us, vs, plane, P, rtol, atol, max_step, jobs, extras):
    chunks = max(1, min(len(us), (jobs or 1) * 4))
    parts = np.array_split(us, chunks)
    arglist = [
        (kind, part, vs, plane, *extras[:2], P, rtol, atol, max_step, *extras[2:])
        for part in parts
        if len(part)
    ]
    if jobs is None or jobs <= 1:
        results = [_grid_rows(a) for a in arglist]
    else:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_grid_rows, arglist))
    return np.concatenate(results, axis=0)


def default_jobs() -> int:
    return os.cpu_count() or 1


@dataclass(frozen=True)
class BasinGrid:
    """Per-cell labels (single-char codes) with the raw evidence attached."""

    grid: GridSpec
    labels: np.ndarray  # (nu, nv) of single chars
    evidence: np.ndarray = field(repr=False)  # (nu, nv, 6)

    def counts(self) -> dict:
        chars, counts = np.unique(self.labels, return_counts=True)
        return {str(c): int(n) for c, n in zip(chars, counts)}


def basin_grid(
    grid: GridSpec,
    p: ModelParams,
    cfg: IntegratorConfig | None = None,
    transient: float = TRANSIENT,
    window: float = WINDOW,
    event_level: float = EVENT_LEVEL,
    section_value: float | None = None,
    jobs: int | None = None,
) -> BasinGrid:
    """Attractor label per grid cell on the section plane."""
    rtol, atol, max_step = _tols(cfg)
    if section_value is None:
        section_value = equilibrium_x(p)
    us, vs = grid.axes()
    P = kn.pack_params(p, None)
    evidence = _run_grid(
        _GRID_KIND_BASIN,
        us,
        vs,
        grid.value,
        P,
        rtol,
        atol,
        max_step,
        jobs,
        (float(transient), float(window), float(event_level), float(section_value)),
    )
    labels = np.empty((grid.nu, grid.nv), dtype="U1")
    for i in range(grid.nu):
        for j in range(grid.nv):
            max_x, n_events, _n_small, period, diverged, status = evidence[i, j]
            kind = _kind_from_evidence(
                max_x, int(n_events), int(period), bool(diverged), int(status),
                event_level,
            )
            labels[i, j] = LABEL_CHARS[kind]
    return BasinGrid(grid=grid, labels=labels, evidence=evidence)


def boundary_cell_count(labels: np.ndarray, a: str = "C", b: str = "M") -> int:
    """Cells of either basin label 4-adjacent to the opposite label."""
    la = labels == a
    lb = labels == b
    touch = np.zeros(labels.shape, dtype=bool)
    for src, other in ((la, lb), (lb, la)):
        for axis, shift in ((0, 1), (0, -1), (1, 1), (1, -1)):
            touch |= src & np.roll(other, shift, axis=axis)
    # roll wraps around; strip the wrapped edges
    edge = np.zeros_like(touch)
    edge[0, :] = edge[-1, :] = True
    edge[:, 0] = edge[:, -1] = True
    interior = touch & ~edge
    # edges handled without wraparound
    for src, other in ((la, lb), (lb, la)):
        interior[0, :] |= src[0, :] & other[1, :]
        interior[-1, :] |= src[-1, :] & other[-2, :]
        interior[:, 0] |= src[:, 0] & other[:, 1]
        interior[:, -1] |= src[:, -1] & other[:, -2]
    return int(np.count_nonzero(interior))


def ftle_grid(
    grid: GridSpec,
    p: ModelParams,
    T: float = 5.0,
    cfg: IntegratorConfig | None = None,
    jobs: int | None = None,
) -> np.ndarray:
    """Matrix of ftle values over the grid (row i = u index, col j = v)."""
    rtol, atol, max_step = _tols(cfg)
    us, vs = grid.axes()
    P = kn.pack_params(p, None)
    return _run_grid(
        _GRID_KIND_FTLE,
        us,
        vs,
        grid.value,
        P,
        rtol,
        atol,
        max_step,
        jobs,
        (float(T), 0.0, 0.0, 0.0),
    )


# ---------------------------------------------------------------------------
# crisis location


@dataclass(frozen=True)
class CrisisResult:
    param: str
    bracket: tuple
    critical: float
    diagnostic: str
    lo_value: float
    hi_value: float
    probes: tuple = ()


def attractor_extent(
    p: ModelParams,
    seed=CHAOTIC_SEED,
    transient: float = TRANSIENT,
    n_crossings: int = 2000,
    t_max: float = 2000.0,
    section_value: float = X_EQ,
    cfg: IntegratorConfig | None = None,
) -> float:
    """Diameter of the attractor's section-crossing cloud.

    Settle from the seed, then collect increasing crossings of
    x = section_value and measure the (y, z) bounding-box diagonal. On the
    chaotic attractor this is a tight band; once that attractor is
    destroyed the trajectory escapes to the strong-event attractor whose
    cloud is several times wider - a discontinuous jump usable as a
    bisection flag.
    """
    rtol, atol, max_step = _tols(cfg)
    P = kn.pack_params(p, None)
    x0, y0, z0, status = kn.integrate_final_k(
        seed[0], seed[1], seed[2], 0.0, float(transient), P, rtol, atol, max_step
    )
    kn.raise_for_status(status, "attractor_extent transient")
    ts, ss, ds, cnt, status, _fin = kn.collect_crossings_k(
        x0,
        y0,
        z0,
        0.0,
        float(t_max),
        0,
        float(section_value),
        1,
        int(n_crossings),
        P,
        rtol,
        atol,
        max_step,
    )
    if status not in (kn.STATUS_OK, kn.STATUS_FULL):
        kn.raise_for_status(status, "attractor_extent crossings")
    if cnt < 2:
        raise NoReturn(
            f"only {cnt} section crossings in t_max={t_max}", t_max=t_max
        )
    ys, zs = ss[:cnt, 1], ss[:cnt, 2]
    return float(np.hypot(ys.max() - ys.min(), zs.max() - zs.min()))


# extent values sit near 0.022 on the surviving chaotic attractor and near
# 0.081 after escape; split the gap
EXTENT_THRESHOLD = 0.05


def crisis_bisection(
    p: ModelParams,
    bracket,
    tol: float = 5e-4,
    param: str = "a",
    seed=CHAOTIC_SEED,
    threshold: float = EXTENT_THRESHOLD,
    cfg: IntegratorConfig | None = None,
) -> CrisisResult:
    """Bisect the parameter where the chaotic attractor is destroyed.

    The flag is attractor_extent > threshold (escaped). The lower bracket
    end must be escaped and the upper end must hold the chaotic attractor,
    otherwise InvalidBracket. Each step halves the bracket exactly; the
    critical value is the final midpoint.
    """
    lo, hi = float(bracket[0]), float(bracket[1])
    if not lo < hi:
        raise InvalidBracket(f"bracket {bracket} is not increasing")

    def escaped(val):
        return attractor_extent(p.replace(**{param: val}), seed=seed, cfg=cfg)

    d_lo = escaped(lo)
    d_hi = escaped(hi)
    probes = [(lo, d_lo), (hi, d_hi)]
    if not (d_lo > threshold and d_hi <= threshold):
        raise InvalidBracket(
            f"extent diagnostic does not straddle the crisis on {bracket}: "
            f"lo {d_lo:.4f}, hi {d_hi:.4f}, threshold {threshold}"
        )
    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        d_mid = escaped(mid)
        probes.append((mid, d_mid))
        if d_mid > threshold:
            lo = mid
        else:
            hi = mid
    return CrisisResult(
        param=param,
        bracket=(lo, hi),
        critical=0.5 * (lo + hi),
        diagnostic="attractor-extent-jump",
        lo_value=d_lo,
        hi_value=d_hi,
        probes=tuple(probes),
    )


# ---------------------------------------------------------------------------
# 1-D return-map diagnostics (fold curve of the unstable manifold)

# patience for fold-curve construction and returns
T_FOLD = 200.0


@dataclass(frozen=True)
class Map1DDiagnostics:
    """Fixed points and fold geometry of the tabulated 1-D return map."""

    a: float
    z_in: np.ndarray
    z_ret: np.ndarray
    fixed_points: tuple  # (z, slope) pairs
    z_at_min: float
    min_value: float
    image_of_min: float
    has_fixed_point: bool
    horseshoe: bool

    def maps_into_itself(self, z_lo: float, z_hi: float) -> bool:
        sel = (self.z_in >= z_lo) & (self.z_in <= z_hi)
        vals = self.z_ret[sel]
        vals = vals[np.isfinite(vals)]
        if vals.size == 0:
            return False
        return bool(np.all((vals >= z_lo) & (vals <= z_hi)))


def fold_return_table(
    p: ModelParams,
    z_window=MAP1D_Z_WINDOW,
    n_samples: int = 41,
    n_seeds: int = 64,
    radius: float = 1e-3,
    cfg: IntegratorConfig | None = None,
):
    """Tabulate the 1-D map z_in -> z_ret on the manifold's fold curve.

    Seeds the equilibrium's unstable eigenplane, records each trajectory's
    first two decreasing crossings of the event plane to populate the fold
    cloud, then maps the cloud points nearest to n_samples target z values
    through their first decreasing return.
    """
    section = SectionSpec("x", EVENT_LEVEL, "decreasing")
    eq = find_equilibrium(p, _EQ_GUESS)
    seeds = seed_unstable_manifold(eq, radius, n_seeds)
    cloud = []
    for s in seeds:
        for c in detect_crossings(s, p, section, t_max=T_FOLD, cfg=cfg,
                                  max_crossings=2)[:2]:
            cloud.append((c.state[1], c.state[2]))
    cloud = np.array(cloud)
    cloud = cloud[cloud[:, 1] < 0.85]
    if len(cloud) < 3:
        raise NoReturn("manifold produced too few fold-curve points", t_max=T_FOLD)
    z_lo, z_hi = z_window
    targets = np.linspace(z_lo, z_hi, n_samples)
    z_in = np.empty(n_samples)
    z_ret = np.empty(n_samples)
    P = kn.pack_params(p, None)
    rtol, atol, max_step = _tols(cfg)
    for i, zt in enumerate(targets):
        j = int(np.argmin(np.abs(cloud[:, 1] - zt)))
        y0, z0 = cloud[j]
        ts, ss, ds, cnt, status, _fin = kn.collect_crossings_k(
            EVENT_LEVEL, y0, z0, 0.0, T_FOLD, 0, EVENT_LEVEL, -1, 1,
            P, rtol, atol, max_step,
        )
        z_in[i] = z0
        z_ret[i] = ss[0, 2] if cnt else np.nan
    order = np.argsort(z_in)
    z_in, z_ret = z_in[order], z_ret[order]
    keep = np.concatenate(([True], np.diff(z_in) > 0))
    return z_in[keep], z_ret[keep]


def analyze_1d_map(p: ModelParams, z_window=MAP1D_Z_WINDOW, **kw) -> Map1DDiagnostics:
    """Fixed points, interior minimum, and horseshoe test of the 1-D map."""
    z_in, z_ret = fold_return_table(p, z_window=z_window, **kw)
    ok = np.isfinite(z_ret)
    z_in, z_ret = z_in[ok], z_ret[ok]
    if z_in.size < 3:
        raise NoReturn("too few valid return samples", t_max=T_FOLD)
    d = z_ret - z_in
    fps = []
    for i in range(1, len(z_in)):
        if d[i - 1] * d[i] < 0.0:
            z0, z1 = z_in[i - 1], z_in[i]
            zr = z0 - d[i - 1] * (z1 - z0) / (d[i] - d[i - 1])
            slope = (z_ret[i] - z_ret[i - 1]) / (z1 - z0)
            fps.append((float(zr), float(slope)))
    imin = int(np.argmin(z_ret))
    min_value = float(z_ret[imin])
    image_of_min = float(np.interp(min_value, z_in, z_ret))
    fp_pos = [zr for zr, sl in fps if sl > 0.0]
    horseshoe = bool(fp_pos and image_of_min > fp_pos[0])
    return Map1DDiagnostics(
        a=p.a,
        z_in=z_in,
        z_ret=z_ret,
        fixed_points=tuple(fps),
        z_at_min=float(z_in[imin]),
        min_value=min_value,
        image_of_min=image_of_min,
        has_fixed_point=bool(fps),
        horseshoe=horseshoe,
    )


@dataclass(frozen=True)
class MmoBoundary:
    """Saddle-node birth and boundary crisis of the 1-D map's dynamics."""

    saddle_node: CrisisResult
    crisis: CrisisResult


def mmo_boundary(
    p: ModelParams,
    sn_bracket,
    crisis_bracket,
    tol: float = 2.5e-4,
    sn_window=MAP1D_Z_WINDOW,
    crisis_window=MAP1D_Z_WINDOW_WIDE,
    **kw,
) -> MmoBoundary:
    """Locate the 1-D map's saddle-node and its boundary crisis in a.

    The saddle-node flag is existence of fixed points inside sn_window;
    the crisis flag is sign of (image of the map minimum) - (positive-slope
    fixed point), sampled on crisis_window. The two domains differ because
    the repelling fixed point exits the unimodal core as a grows, while the
    core window shields the birth test from steep secondary structure.
    Each search bisects its own bracket; InvalidBracket when a bracket end
    does not show the required flag.
    """

    def diags(a, window):
        return analyze_1d_map(p.replace(a=a), z_window=window, **kw)

    lo, hi = float(sn_bracket[0]), float(sn_bracket[1])
    if not lo < hi:
        raise InvalidBracket(f"saddle-node bracket {sn_bracket} is not increasing")
    d_lo, d_hi = diags(lo, sn_window), diags(hi, sn_window)
    if d_lo.has_fixed_point or not d_hi.has_fixed_point:
        raise InvalidBracket(
            "fixed-point existence does not straddle the saddle-node on "
            f"{sn_bracket}"
        )
    probes = [(lo, 0.0), (hi, 1.0)]
    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        has = diags(mid, sn_window).has_fixed_point
        probes.append((mid, 1.0 if has else 0.0))
        if has:
            hi = mid
        else:
            lo = mid
    sn = CrisisResult(
        param="a",
        bracket=(lo, hi),
        critical=0.5 * (lo + hi),
        diagnostic="fixed-point-birth",
        lo_value=0.0,
        hi_value=1.0,
        probes=tuple(probes),
    )

    def gap(a):
        d = diags(a, crisis_window)
        fp_pos = [zr for zr, sl in d.fixed_points if sl > 0.0]
        if not fp_pos:
            raise InvalidBracket(
                f"no positive-slope fixed point at a={a}; crisis bracket must "
                "sit above the saddle-node"
            )
        return d.image_of_min - fp_pos[0]

    lo, hi = float(crisis_bracket[0]), float(crisis_bracket[1])
    if not lo < hi:
        raise InvalidBracket(f"crisis bracket {crisis_bracket} is not increasing")
    g_lo, g_hi = gap(lo), gap(hi)
    if not (g_lo < 0.0 < g_hi):
        raise InvalidBracket(
            f"min-image gap does not change sign on {crisis_bracket}: "
            f"{g_lo:.2e} .. {g_hi:.2e}"
        )
    probes = [(lo, g_lo), (hi, g_hi)]
    while hi - lo > 2.0 * tol:
        mid = 0.5 * (lo + hi)
        g_mid = gap(mid)
        probes.append((mid, g_mid))
        if g_mid < 0.0:
            lo = mid
        else:
            hi = mid
    crisis = CrisisResult(
        param="a",
        bracket=(lo, hi),
        critical=0.5 * (lo + hi),
        diagnostic="min-image-vs-fixed-point",
        lo_value=g_lo,
        hi_value=g_hi,
        probes=tuple(probes),
    )
    return MmoBoundary(saddle_node=sn, crisis=crisis)


def bistability_strip(
    delta_values,
    p: ModelParams,
    chaotic_bracket,
    sn_bracket,
    mmo_bracket,
    tol: float = 2.5e-4,
    widen: float = 2.0,
    max_widen: int = 3,
) -> list[dict]:
    """Per-delta chaotic-crisis and strong-event-crisis boundary values.

    Brackets are recentred on the previous delta's boundaries (the curves
    are near-parallel), widening geometrically on InvalidBracket. Failures
    are recorded per delta, not fatal.
    """

    def recentre(bracket, center):
        half = 0.5 * (bracket[1] - bracket[0])
        return (center - half, center + half)

    rows = []
    cb, sb, mb = tuple(chaotic_bracket), tuple(sn_bracket), tuple(mmo_bracket)
    for d in delta_values:
        pd = p.replace(delta=float(d))
        row = {"delta": float(d), "a_chaotic_crisis": None, "a_mmo_crisis": None,
               "error": None}
        try:
            cres = _with_widening(
                lambda b: crisis_bisection(pd, b, tol=tol), cb, widen, max_widen
            )
            row["a_chaotic_crisis"] = cres.critical
            cb = recentre(cb, cres.critical)
            mres = _with_widening(
                lambda b: mmo_boundary(pd, sb, b, tol=tol).crisis,
                mb,
                widen,
                max_widen,
            )
            row["a_mmo_crisis"] = mres.critical
            mb = recentre(mb, mres.critical)
        except (InvalidBracket, NoReturn) as exc:
            row["error"] = str(exc)
        rows.append(row)
    return rows


def _with_widening(run, bracket, widen, max_widen):
    lo, hi = bracket
    for _ in range(max_widen + 1):
        try:
            return run((lo, hi))
        except InvalidBracket:
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo) * widen
            lo, hi = mid - half, mid + half
    raise InvalidBracket(f"no valid bracket up to {(lo, hi)}")


# ---------------------------------------------------------------------------
# artifact writers


def write_matrix_csv(path, matrix):
    from .artifacts import write_csv

    matrix = np.asarray(matrix)
    header = [f"c{j}" for j in range(matrix.shape[1])]
    return write_csv(path, header, (row for row in matrix))


def write_grid_sidecar(path, grid: GridSpec, p: ModelParams, extra: dict | None = None):
    from .artifacts import config_hash, write_json

    obj = {
        "grid": grid.describe(),
        "params": {
            "delta": p.delta,
            "rho": p.rho,
            "c": p.c,
            "k": p.k,
            "a": p.a,
        },
    }
    obj["config_hash"] = config_hash(obj)
    if extra:
        obj.update(extra)
    return write_json(path, obj)


def write_strip_csv(path, rows):
    from .artifacts import write_csv

    def gen():
        for r in rows:
            yield (
                r["delta"],
                "" if r["a_chaotic_crisis"] is None else r["a_chaotic_crisis"],
                "" if r["a_mmo_crisis"] is None else r["a_mmo_crisis"],
            )

    return write_csv(path, ["delta", "a_chaotic_crisis", "a_mmo_crisis"], gen())
