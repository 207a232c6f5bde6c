"""Poincare sections: crossing detection, k-th returns, curve machinery.

A section is a coordinate plane {x|y|z} = value with an optional direction
filter. Crossing times are refined on the integrator's dense output until
the coordinate residual is below 1e-10, so downstream return maps inherit
full integrator accuracy rather than step-size resolution.

Return maps here are *same-direction* maps: the k-th return of a point is
the k-th crossing with the same direction filter, which gives one return
per fast oscillation loop on this model's attractors.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import kernels as kn
from .errors import ConfigError, DegenerateGeometry, NoReturn, NotSaddleFocus
from .integrators import IntegratorConfig
from .model import Forcing, ModelParams

_COORDS = {"x": 0, "y": 1, "z": 2}
_DIRECTIONS = {"increasing": 1, "decreasing": -1, "both": 0}

# residual bound every reported crossing satisfies
CROSSING_RESIDUAL = 1e-10


@dataclass(frozen=True)
class SectionSpec:
    """A coordinate plane with a crossing-direction filter."""

    coordinate: str
    value: float
    direction: str = "increasing"

    def __post_init__(self):
        if self.coordinate not in _COORDS:
            raise ConfigError(f"unknown section coordinate {self.coordinate!r}")
        if self.direction not in _DIRECTIONS:
            raise ConfigError(f"unknown section direction {self.direction!r}")
        if not np.isfinite(self.value):
            raise ConfigError("section value must be finite")

    @property
    def coord_index(self) -> int:
        return _COORDS[self.coordinate]

    @property
    def direction_sign(self) -> int:
        return _DIRECTIONS[self.direction]

    def free_indices(self) -> tuple[int, int]:
        """The two in-plane coordinate indices, in (x, y, z) order."""
        i = self.coord_index
        return tuple(j for j in range(3) if j != i)

    def residual(self, state) -> float:
        return float(np.asarray(state)[self.coord_index] - self.value)

    def embed(self, uv) -> np.ndarray:
        """Lift in-plane coordinates (u, v) to a full state on the plane."""
        s = np.empty(3)
        s[self.coord_index] = self.value
        j, k = self.free_indices()
        s[j], s[k] = uv
        return s


@dataclass(frozen=True)
class Crossing:
    """A refined intersection of a trajectory with a section."""

    t: float
    state: np.ndarray
    direction: int


@dataclass(frozen=True)
class ReturnSample:
    """One k-th-return pair: where a section point came back."""

    state_in: np.ndarray
    state_out: np.ndarray
    elapsed: float
    k: int


def _pack(p: ModelParams, forcing: Forcing | None):
    return kn.pack_params(p, forcing)


def _tols(cfg: IntegratorConfig | None):
    if cfg is None:
        cfg = IntegratorConfig()
    return cfg.rtol, cfg.atol, cfg.max_step


def detect_crossings(
    s0,
    p: ModelParams,
    section: SectionSpec,
    t_max: float,
    cfg: IntegratorConfig | None = None,
    forcing: Forcing | None = None,
    max_crossings: int = 100000,
) -> list[Crossing]:
    """All direction-filtered crossings along the flow from s0 over [0, t_max]."""
    rtol, atol, max_step = _tols(cfg)
    s0 = np.asarray(s0, dtype=float)
    ts, ss, ds, count, status, _final = kn.collect_crossings_k(
        s0[0],
        s0[1],
        s0[2],
        0.0,
        float(t_max),
        section.coord_index,
        section.value,
        section.direction_sign,
        int(max_crossings),
        _pack(p, forcing),
        rtol,
        atol,
        max_step,
    )
    # a full buffer is not an error: the caller asked for at most max_crossings
    if status != kn.STATUS_FULL:
        kn.raise_for_status(status, "detect_crossings")
    return [
        Crossing(t=float(ts[i]), state=ss[i].copy(), direction=int(ds[i]))
        for i in range(count)
    ]


# default patience before a missing return is declared
T_MAX_RETURN = 200.0


def kth_return(
    points,
    k: int,
    section: SectionSpec,
    p: ModelParams,
    cfg: IntegratorConfig | None = None,
    t_max: float = T_MAX_RETURN,
    on_section_tol: float = 1e-8,
) -> list[ReturnSample]:
    """k-th same-direction return of each on-section point.

    Raises NoReturn as soon as any point fails to complete k crossings
    before t_max; callers that want per-point tolerance should map over
    single points themselves.
    """
    if k < 1:
        raise ConfigError("k must be >= 1")
    rtol, atol, max_step = _tols(cfg)
    P = _pack(p, None)
    out = []
    for q in np.atleast_2d(np.asarray(points, dtype=float)):
        if abs(section.residual(q)) > on_section_tol:
            raise ConfigError(
                f"point {q} is off the section by {section.residual(q):.2e}"
            )
        ts, ss, ds, count, status, _final = kn.collect_crossings_k(
            q[0],
            q[1],
            q[2],
            0.0,
            float(t_max),
            section.coord_index,
            section.value,
            section.direction_sign,
            int(k),
            P,
            rtol,
            atol,
            max_step,
        )
        if status not in (kn.STATUS_OK, kn.STATUS_FULL):
            kn.raise_for_status(status, "kth_return")
        if count < k:
            raise NoReturn(
                f"point {q} made {count}/{k} returns before t_max={t_max}",
                t_max=t_max,
            )
        out.append(
            ReturnSample(
                state_in=q.copy(),
                state_out=ss[k - 1].copy(),
                elapsed=float(ts[k - 1]),
                k=int(k),
            )
        )
    return out


def seed_unstable_manifold(eq, radius: float, n_points: int) -> np.ndarray:
    """Points on a circle in the unstable eigenplane around an equilibrium.

    The circle lives in the plane spanned by the real and imaginary parts
    of the complex eigenvector (orthonormalized), so early forward images
    spiral outward along the local unstable manifold, growing by
    exp(2*pi*Re/Im) per revolution.
    """
    if n_points < 1:
        raise ConfigError("need at least one seed point")
    if not eq.is_saddle_focus or eq.observable_direction is None:
        raise NotSaddleFocus("equilibrium has no complex eigenvalue pair")
    vec = None
    for i, lam in enumerate(eq.eigenvalues):
        if lam.imag > 0.0:
            if lam.real <= 0.0:
                raise NotSaddleFocus("complex pair is not unstable")
            vec = eq.eigenvectors[:, i]
            break
    if vec is None:
        raise NotSaddleFocus("no complex eigenvalue with positive imaginary part")
    e1 = vec.real / np.linalg.norm(vec.real)
    e2 = vec.imag - (vec.imag @ e1) * e1
    n2 = np.linalg.norm(e2)
    if n2 == 0.0:
        raise NotSaddleFocus("eigenplane is degenerate")
    e2 = e2 / n2
    thetas = np.linspace(0.0, 2.0 * np.pi, n_points, endpoint=False)
    return (
        eq.state[None, :]
        + radius * np.cos(thetas)[:, None] * e1[None, :]
        + radius * np.sin(thetas)[:, None] * e2[None, :]
    )


def _chain_order(pts: np.ndarray) -> np.ndarray:
    """Order a curve-like point cloud by nearest-neighbor chaining.

    Plain coordinate sorting scrambles folded curves (the two branches of
    a fold interleave in either coordinate), so walk the cloud greedily
    from an extreme point instead.
    """
    n = len(pts)
    d2 = np.sum((pts[:, None, :] - pts[None, :, :]) ** 2, axis=2)
    start = int(np.argmax(np.sum(d2, axis=1)))
    order = [start]
    used = np.zeros(n, dtype=bool)
    used[start] = True
    cur = start
    for _ in range(n - 1):
        cand = np.where(~used)[0]
        nxt = cand[np.argmin(d2[cur, cand])]
        order.append(int(nxt))
        used[nxt] = True
        cur = nxt
    return np.array(order)


@dataclass(frozen=True)
class PlaneCurve:
    """Quadratic arclength parametrization of points on a section plane.

    Both in-plane coordinates are quadratics in the chained arclength s,
    fitted by least squares; rms_residual reports the fit quality. sample()
    re-evaluates the polynomial uniformly in s.
    """

    coeffs_u: np.ndarray  # u(s) = c0 + c1 s + c2 s^2
    coeffs_v: np.ndarray
    s_max: float
    rms_residual: float
    points: np.ndarray = field(repr=False)

    def point(self, s):
        s = np.asarray(s, dtype=float)
        u = self.coeffs_u[0] + s * (self.coeffs_u[1] + s * self.coeffs_u[2])
        v = self.coeffs_v[0] + s * (self.coeffs_v[1] + s * self.coeffs_v[2])
        return np.stack([u, v], axis=-1)

    def sample(self, n: int) -> np.ndarray:
        return self.point(np.linspace(0.0, self.s_max, n))

    @property
    def length(self) -> float:
        # arclength of the fitted quadratic, dense polyline evaluation
        q = self.point(np.linspace(0.0, self.s_max, 512))
        return float(np.sum(np.hypot(*np.diff(q, axis=0).T)))


def fit_quadratic(points) -> PlaneCurve:
    """Least-squares quadratic curve through in-plane points.

    points: (n, 2) array of the section's two free coordinates. Points are
    chained nearest-neighbor first; s is cumulative chord length.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ConfigError("fit_quadratic wants an (n, 2) array")
    if len(pts) < 3:
        raise DegenerateGeometry("need at least 3 points for a quadratic fit")
    pts = pts[_chain_order(pts)]
    seg = np.hypot(*np.diff(pts, axis=0).T)
    s = np.concatenate(([0.0], np.cumsum(seg)))
    if s[-1] <= 0.0:
        raise DegenerateGeometry("points are coincident; zero arclength")
    design = np.column_stack([np.ones_like(s), s, s * s])
    if np.linalg.matrix_rank(design) < 3:
        raise DegenerateGeometry("fewer than 3 distinct arclength stations")
    cu, *_ = np.linalg.lstsq(design, pts[:, 0], rcond=None)
    cv, *_ = np.linalg.lstsq(design, pts[:, 1], rcond=None)
    resid = design @ np.column_stack([cu, cv]) - pts
    rms = float(np.sqrt(np.mean(np.sum(resid**2, axis=1))))
    return PlaneCurve(
        coeffs_u=cu, coeffs_v=cv, s_max=float(s[-1]), rms_residual=rms, points=pts
    )


def approx_1d_return_map(
    curve_points,
    section: SectionSpec,
    p: ModelParams,
    cfg: IntegratorConfig | None = None,
    n_samples: int = 41,
    t_max: float = T_MAX_RETURN,
):
    """Tabulate v_in -> v_ret along a curve on the section.

    curve_points: (n, 2) in-plane points (or a PlaneCurve). The map is
    read in the section's second free coordinate (z for an x-plane). The
    input curve is the attractor's own fold curve, so the tabulated map is
    the flow's return dynamics collapsed onto one dimension. Samples that
    never return are recorded as NaN rather than aborting the whole scan.

    Returns (v_in, v_ret) arrays sorted by v_in with duplicates dropped.
    """
    if isinstance(curve_points, PlaneCurve):
        uv = curve_points.sample(n_samples)
    else:
        uv = np.asarray(curve_points, dtype=float)
    v_in = np.empty(len(uv))
    v_ret = np.empty(len(uv))
    _, vi = section.free_indices()
    for i, q in enumerate(uv):
        state = section.embed(q)
        v_in[i] = q[1]
        try:
            (sample,) = kth_return([state], 1, section, p, cfg, t_max=t_max)
            v_ret[i] = sample.state_out[vi]
        except NoReturn:
            v_ret[i] = np.nan
    order = np.argsort(v_in)
    v_in, v_ret = v_in[order], v_ret[order]
    keep = np.concatenate(([True], np.diff(v_in) > 0))
    return v_in[keep], v_ret[keep]


# ---------------------------------------------------------------------------
# CSV artifact writers


def write_crossings_csv(path, crossings):
    from .artifacts import write_csv

    rows = (
        (c.t, c.state[0], c.state[1], c.state[2], c.direction) for c in crossings
    )
    return write_csv(path, ["t", "x", "y", "z", "dir"], rows)


def write_returns_csv(path, samples):
    """Return-sample schema for x-plane sections: (y, z) in and out."""
    from .artifacts import write_csv

    rows = (
        (
            r.state_in[1],
            r.state_in[2],
            r.state_out[1],
            r.state_out[2],
            r.elapsed,
        )
        for r in samples
    )
    return write_csv(path, ["y_in", "z_in", "y_out", "z_out", "dt"], rows)


def write_map_csv(path, v_in, v_ret):
    from .artifacts import write_csv

    return write_csv(path, ["z_in", "z_ret"], zip(v_in, v_ret))
