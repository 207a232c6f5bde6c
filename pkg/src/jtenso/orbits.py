"""Periodic orbits: Newton on section return maps, Floquet analysis.

The section return map's Jacobian comes from the variational flow
projected onto the section, not finite differences; these maps contract
so strongly in one direction (multipliers down at 1e-6 and below) that
difference quotients lose the second multiplier entirely. The projection:
if M is the fundamental matrix at the return and f the flow vector there,

    DP = (I - f e_c^T / f_c) M   restricted to the in-plane coordinates,

where c is the section coordinate. One subtlety specific to this model:
the equilibrium lies exactly on the x = x_eq plane, so that section is
non-transverse in a neighborhood of it. Newton happily "converges" to
spurious near-equilibrium points there, which a transversality floor on
the flow's section-normal component rejects.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import kernels as kn
from .eig3 import eig2, eig3
from .errors import ConfigError, NoConvergence, NoReturn, SingularJacobian
from .integrators import IntegratorConfig
from .model import ModelParams, raw_per_year, vector_field
from .sections import SectionSpec

# multipliers below this are reported as exact zeros (rank-deficient map)
RANK_DEFICIENT_FLOOR = 1e-10

# reject "fixed points" where the raw flow is this close to section-tangent
TRANSVERSALITY_FLOOR = 1e-2


@dataclass(frozen=True)
class Classification:
    stability: str  # stable | saddle | unstable
    non_orientable: bool
    rank_deficient: bool


@dataclass(frozen=True)
class PeriodicOrbit:
    """A converged fixed point of the k-th-return section map."""

    section: SectionSpec
    k: int
    point: np.ndarray  # full state on the section
    period: float
    multipliers: np.ndarray  # the 2 section-map multipliers
    stability: str
    non_orientable: bool
    rank_deficient: bool
    residual: float
    iterations: int
    residual_history: tuple


def classify(multipliers) -> Classification:
    """Stability and orientability from nontrivial multipliers.

    Multipliers with magnitude below RANK_DEFICIENT_FLOOR are treated as
    exact zeros (numerically rank-deficient return map) and count as
    contracting. The orbit is non-orientable when the dominant multiplier
    is real and negative: the return map flips the local transverse
    (Mobius-strip unstable/stable manifold geometry).
    """
    mu = np.atleast_1d(np.asarray(multipliers, dtype=complex))
    rank_deficient = bool(np.any(np.abs(mu) < RANK_DEFICIENT_FLOOR))
    mags = np.abs(mu)
    if np.all(mags < 1.0):
        stability = "stable"
    elif np.all(mags > 1.0):
        stability = "unstable"
    else:
        stability = "saddle"
    dom = mu[np.argmax(mags)]
    non_orientable = bool(abs(dom.imag) < 1e-12 and dom.real < 0.0)
    return Classification(stability, non_orientable, rank_deficient)


def _zero_small(mu: np.ndarray) -> np.ndarray:
    out = mu.copy()
    out[np.abs(out) < RANK_DEFICIENT_FLOOR] = 0.0
    return out


def _section_return_state_jac(w, section, k, p, P, rtol, atol, max_step, t_max):
    """Return state, in-plane Jacobian, and elapsed time of the k-th return."""
    state = section.embed(w)
    ci = section.coord_index
    Y, tc, hits, status = kn.var_to_crossing_k(
        state[0],
        state[1],
        state[2],
        int(k),
        ci,
        section.value,
        section.direction_sign,
        float(t_max),
        P,
        rtol,
        atol,
        max_step,
    )
    kn.raise_for_status(status, "section return")
    if hits < k:
        raise NoReturn(
            f"point {state} made {hits}/{k} returns before t_max={t_max}",
            t_max=t_max,
        )
    s1 = Y[:3].copy()
    M = Y[3:].reshape(3, 3)
    f1 = raw_per_year(p) * vector_field(s1, p)
    if f1[ci] == 0.0:
        raise SingularJacobian("flow is tangent to the section at the return")
    DP = M - np.outer(f1, M[ci, :]) / f1[ci]
    free = section.free_indices()
    return s1, DP[np.ix_(free, free)], float(tc)


def newton_periodic(
    section: SectionSpec,
    k: int,
    guess,
    p: ModelParams,
    cfg: IntegratorConfig | None = None,
    tol: float = 1e-10,
    max_iter: int = 50,
    max_newton_step: float = 0.02,
    t_max: float = 400.0,
) -> PeriodicOrbit:
    """Newton iteration for a fixed point of the k-th-return map.

    guess: a state on (or near) the section; its free coordinates seed the
    iteration and the section coordinate is snapped to the plane. Steps
    are trust-region damped to max_newton_step so a seed on the wrong side
    of a fold cannot fling the iterate off the attractor's neighborhood.
    """
    if section.direction_sign == 0:
        raise ConfigError("newton_periodic needs a one-sided section direction")
    if cfg is None:
        cfg = IntegratorConfig(rtol=1e-11, atol=1e-13)
    rtol, atol, max_step = cfg.rtol, cfg.atol, cfg.max_step
    P = kn.pack_params(p, None)
    free = section.free_indices()
    guess = np.asarray(guess, dtype=float)
    w = guess[list(free)].copy()

    history = []
    for it in range(1, max_iter + 1):
        s1, DP, tc = _section_return_state_jac(
            w, section, k, p, P, rtol, atol, max_step, t_max
        )
        F = s1[list(free)] - w
        res = float(np.linalg.norm(F))
        history.append(res)
        if res < tol:
            fin_raw = vector_field(s1, p)
            if abs(fin_raw[section.coord_index]) < TRANSVERSALITY_FLOOR:
                raise NoConvergence(
                    "converged to a section-tangent point (the plane is "
                    "non-transverse near the equilibrium); reseed farther out",
                    residual=res,
                    iterations=it,
                )
            mu = _zero_small(eig2(DP))
            cls = classify(mu)
            return PeriodicOrbit(
                section=section,
                k=int(k),
                point=section.embed(w),
                period=tc,
                multipliers=mu,
                stability=cls.stability,
                non_orientable=cls.non_orientable,
                rank_deficient=cls.rank_deficient,
                residual=res,
                iterations=it,
                residual_history=tuple(history),
            )
        try:
            dw = np.linalg.solve(DP - np.eye(2), -F)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                "section-map Jacobian minus identity is singular"
            ) from exc
        step = min(1.0, max_newton_step / max(float(np.linalg.norm(dw)), 1e-300))
        w = w + step * dw
    raise NoConvergence(
        f"Newton did not reach tol={tol} in {max_iter} iterations",
        residual=history[-1] if history else float("inf"),
        iterations=max_iter,
    )


def monodromy(orbit: PeriodicOrbit, p: ModelParams, cfg: IntegratorConfig | None = None):
    """Fundamental matrix over one period and its eigenvalues.

    One eigenvalue is the trivial unit multiplier of the autonomous flow
    direction; the other two agree with the section-map multipliers.
    """
    if cfg is None:
        cfg = IntegratorConfig(rtol=1e-11, atol=1e-13)
    P = kn.pack_params(p, None)
    s = orbit.point
    Y, status = kn.var_final_k(
        s[0], s[1], s[2], float(orbit.period), P, cfg.rtol, cfg.atol, cfg.max_step
    )
    kn.raise_for_status(status, "monodromy")
    M = Y[3:].reshape(3, 3).copy()
    mults, _vecs = eig3(M)
    return M, mults


def write_orbit_json(path, orbit: PeriodicOrbit):
    from .artifacts import write_json

    return write_json(
        path,
        {
            "section": {
                "coordinate": orbit.section.coordinate,
                "value": orbit.section.value,
                "direction": orbit.section.direction,
            },
            "k": orbit.k,
            "point": orbit.point,
            "period": orbit.period,
            "multipliers": [
                {"re": m.real, "im": m.imag} for m in orbit.multipliers
            ],
            "stability": orbit.stability,
            "non_orientable": orbit.non_orientable,
            "rank_deficient": orbit.rank_deficient,
            "residual": orbit.residual,
            "iterations": orbit.iterations,
        },
    )
