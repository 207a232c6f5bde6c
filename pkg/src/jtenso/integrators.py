"""Adaptive Runge-Kutta integration with dense output.

The embedded pair is the Dormand-Prince 5(4) scheme with its standard
quartic interpolant, driven by a PI step-size controller. Everything here
is generic over the right-hand side; the model-specific compiled kernels
live in kernels.py and are cross-validated against this implementation in
the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteState, StepSizeUnderflow

# Dormand-Prince 5(4) tableau.
_C = np.array([0.0, 1 / 5, 3 / 10, 4 / 5, 8 / 9, 1.0, 1.0])
_A = np.array(
    [
        [0, 0, 0, 0, 0, 0],
        [1 / 5, 0, 0, 0, 0, 0],
        [3 / 40, 9 / 40, 0, 0, 0, 0],
        [44 / 45, -56 / 15, 32 / 9, 0, 0, 0],
        [19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729, 0, 0],
        [9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656, 0],
    ]
)
_B = np.array([35 / 384, 0.0, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84])
# fifth-order solution minus fourth-order embedded solution
_E = np.array(
    [71 / 57600, 0.0, -71 / 16695, 71 / 1920, -17253 / 339200, 22 / 525, -1 / 40]
)
# dense-output polynomial: y(t0 + u*h) = y0 + h * K^T P [u, u^2, u^3, u^4]
_P = np.array(
    [
        [1, -8048581381 / 2820520608, 8663915743 / 2820520608, -12715105075 / 11282082432],
        [0, 0, 0, 0],
        [0, 131558114200 / 32700410799, -68118460800 / 10900136933, 87487479700 / 32700410799],
        [0, -1754552775 / 470086768, 14199869525 / 1410260304, -10690763975 / 1880347072],
        [0, 127303824393 / 49829197408, -318862633887 / 49829197408, 701980252875 / 199316789632],
        [0, -282668133 / 205662961, 2019193451 / 616988883, -1453857185 / 822651844],
        [0, 40617522 / 29380423, -110615467 / 29380423, 69997945 / 29380423],
    ]
)

_SAFETY = 0.9
_BETA = 0.04  # PI stabilization
_EXPO = 0.2 - 0.75 * _BETA
_MIN_FACTOR = 0.2
_MAX_FACTOR = 10.0


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and step limits for the adaptive integrator.

    The defaults are deliberately tight: section crossing positions feed
    Newton iterations downstream, so integration error must sit well below
    the quantities quoted to five decimals.
    """

    rtol: float = 1e-9
    atol: float = 1e-11
    max_step: float = np.inf
    initial_step: float | None = None

    def __post_init__(self):
        if self.rtol <= 0 or self.atol <= 0:
            raise ValueError("tolerances must be positive")
        if self.max_step <= 0:
            raise ValueError("max_step must be positive")


@dataclass(frozen=True)
class NoisePlan:
    """Fixed-step additive-noise settings for integrate_sde.

    sigma may be a scalar (same scale on every component) or a
    per-component sequence; dt must resolve the fastest oscillation of
    the deterministic flow.
    """

    sigma: float | tuple = 0.0
    dt: float = 0.01
    seed: int = 0

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("dt must be positive")
        sig = np.atleast_1d(np.asarray(self.sigma, dtype=float))
        if np.any(sig < 0):
            raise ValueError("sigma must be nonnegative")


class Trajectory:
    """Time-stamped states plus per-step dense-output coefficients.

    Calling the object (or interpolate) evaluates the continuous solution.
    Trajectories from the fixed-step stochastic path carry no dense
    coefficients and interpolate linearly between stored nodes.
    """

    def __init__(self, times, states, dense_q=None, step_h=None):
        self.times = np.asarray(times, dtype=float)
        self.states = np.asarray(states, dtype=float)
        self._q = dense_q  # (n_steps, dim, 4) or None
        self._h = step_h  # (n_steps,) or None

    def __len__(self):
        return len(self.times)

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def interpolate(self, t):
        t_arr = np.atleast_1d(np.asarray(t, dtype=float))
        if t_arr.min() < self.times[0] - 1e-12 or t_arr.max() > self.times[-1] + 1e-12:
            raise ValueError("interpolation time outside the integrated span")
        idx = np.clip(np.searchsorted(self.times, t_arr, side="right") - 1, 0, len(self.times) - 2)
        out = np.empty((len(t_arr), self.states.shape[1]))
        for j, (ti, i) in enumerate(zip(t_arr, idx)):
            out[j] = self._eval_step(int(i), ti)
        return out[0] if np.isscalar(t) else out

    __call__ = interpolate

    def _eval_step(self, i: int, t: float) -> np.ndarray:
        h = self.times[i + 1] - self.times[i]
        if h == 0.0:
            return self.states[i]
        u = (t - self.times[i]) / h
        if self._q is None:
            return (1.0 - u) * self.states[i] + u * self.states[i + 1]
        pu = np.array([u, u * u, u ** 3, u ** 4])
        return self.states[i] + h * (self._q[i] @ pu)


class VariationalTrajectory:
    """A base trajectory bundled with its fundamental matrix solution.

    fundamental_matrices[i] solves M' = J(s(t)) M with M(t0) = I,
    evaluated at times[i].
    """

    def __init__(self, base: Trajectory, fundamental_matrices):
        self.base = base
        self.fundamental_matrices = np.asarray(fundamental_matrices)

    @property
    def times(self):
        return self.base.times

    @property
    def states(self):
        return self.base.states

    def final_matrix(self) -> np.ndarray:
        return self.fundamental_matrices[-1]


def _error_norm(err, y0, y1, rtol, atol):
    scale = atol + rtol * np.maximum(np.abs(y0), np.abs(y1))
    return float(np.sqrt(np.mean((err / scale) ** 2)))


def _initial_step(field, t0, y0, f0, rtol, atol, max_step):
    scale = atol + rtol * np.abs(y0)
    d0 = float(np.linalg.norm(y0 / scale) / np.sqrt(y0.size))
    d1 = float(np.linalg.norm(f0 / scale) / np.sqrt(y0.size))
    h0 = 1e-6 if d0 < 1e-5 or d1 < 1e-5 else 0.01 * d0 / d1
    y1 = y0 + h0 * f0
    f1 = np.asarray(field(t0 + h0, y1), dtype=float)
    d2 = float(np.linalg.norm((f1 - f0) / scale) / np.sqrt(y0.size)) / h0
    if max(d1, d2) <= 1e-15:
        h1 = max(1e-6, h0 * 1e-3)
    else:
        h1 = (0.01 / max(d1, d2)) ** 0.2
    return min(100 * h0, h1, max_step)


def integrate(field, s0, t_span, cfg: IntegratorConfig = IntegratorConfig()) -> Trajectory:
    """Integrate s' = field(t, s) over t_span with dense output.

    Returns the accepted-step skeleton; continuous values in between come
    from Trajectory.interpolate. Raises NonFiniteState if the solution
    leaves the finite floats and StepSizeUnderflow if the controller can
    no longer advance.
    """
    t0, tf = float(t_span[0]), float(t_span[1])
    if not (np.isfinite(t0) and np.isfinite(tf)) or tf <= t0:
        raise ValueError("t_span must be finite with t_end > t_start")
    y = np.asarray(s0, dtype=float).copy()
    if not np.all(np.isfinite(y)):
        raise NonFiniteState("initial state is not finite", t=t0, state=y)
    dim = y.size

    f0 = np.asarray(field(t0, y), dtype=float)
    h = cfg.initial_step or _initial_step(field, t0, y, f0, cfg.rtol, cfg.atol, cfg.max_step)
    h = min(h, cfg.max_step, tf - t0)

    times = [t0]
    states = [y.copy()]
    qs = []
    hs = []
    t = t0
    k = np.empty((7, dim))
    k[0] = f0
    facold = 1e-4

    while t < tf:
        h = min(h, tf - t)
        if h < 16 * np.finfo(float).eps * max(abs(t), 1.0):
            raise StepSizeUnderflow("step size underflow", t=t, step=h)

        for i in range(1, 6):
            yi = y + h * (_A[i, :i] @ k[:i])
            k[i] = field(t + _C[i] * h, yi)
        y_new = y + h * (_B @ k[:6])
        k[6] = field(t + h, y_new)
        err_vec = h * (_E @ k)
        if not np.all(np.isfinite(y_new)):
            raise NonFiniteState("state became non-finite", t=t, state=y_new)
        err = _error_norm(err_vec, y, y_new, cfg.rtol, cfg.atol)

        if err <= 1.0:
            qs.append(k.T @ _P)
            hs.append(h)
            t = t + h
            y = y_new
            times.append(t)
            states.append(y.copy())
            k[0] = k[6]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0 else 1.0 / _MAX_FACTOR
            h = h * min(_MAX_FACTOR, max(_MIN_FACTOR, _SAFETY / fac))
            h = min(h, cfg.max_step)
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(_MIN_FACTOR, min(1.0, _SAFETY / fac))

    return Trajectory(
        np.array(times), np.array(states), np.array(qs), np.array(hs)
    )


def integrate_variational(
    field, jac, s0, t_span, cfg: IntegratorConfig = IntegratorConfig()
) -> VariationalTrajectory:
    """Integrate the state and its fundamental matrix simultaneously.

    The augmented system is (s, M) with M' = jac(t, s) M and M(t0) = I;
    dimension 12 for a three-dimensional state.
    """
    y0 = np.asarray(s0, dtype=float)
    dim = y0.size
    aug0 = np.concatenate([y0, np.eye(dim).ravel()])

    def aug_field(t, aug):
        s = aug[:dim]
        m = aug[dim:].reshape(dim, dim)
        ds = np.asarray(field(t, s), dtype=float)
        dm = np.asarray(jac(t, s), dtype=float) @ m
        return np.concatenate([ds, dm.ravel()])

    traj = integrate(aug_field, aug0, t_span, cfg)
    mats = traj.states[:, dim:].reshape(-1, dim, dim)
    dense_q = traj._q[:, :dim, :].copy() if traj._q is not None else None
    base = Trajectory(traj.times, traj.states[:, :dim].copy(), dense_q, traj._h)
    return VariationalTrajectory(base, mats)


def liouville_defect(var: VariationalTrajectory, jac) -> float:
    """Max relative mismatch of det M(t) against exp(integral of trace J).

    The trace is integrated per accepted step with 4-point Gauss-Legendre
    on the dense output (falling back to step endpoints when no dense
    coefficients are stored), so the quadrature error stays well below the
    integrator tolerance and the defect measures the matrix drift itself.
    """
    times = var.times
    base = var.base
    # Gauss-Legendre nodes and weights on [0, 1]
    gl_u = 0.5 + 0.5 * np.array(
        [-0.8611363115940526, -0.3399810435848563, 0.3399810435848563, 0.8611363115940526]
    )
    gl_w = 0.5 * np.array(
        [0.3478548451374538, 0.6521451548625461, 0.6521451548625461, 0.3478548451374538]
    )
    integral = np.empty(times.size)
    integral[0] = 0.0
    for i in range(times.size - 1):
        t0, t1 = times[i], times[i + 1]
        h = t1 - t0
        acc = 0.0
        for u, w in zip(gl_u, gl_w):
            tq = t0 + u * h
            sq = base(tq) if base._q is not None else base.states[i] + u * (
                base.states[i + 1] - base.states[i]
            )
            acc += w * np.trace(np.asarray(jac(tq, sq), dtype=float))
        integral[i + 1] = integral[i] + h * acc
    worst = 0.0
    for m, q in zip(var.fundamental_matrices, integral):
        expected = np.exp(q)
        got = np.linalg.det(m)
        worst = max(worst, abs(got - expected) / abs(expected))
    return worst


def integrate_sde(field, s0, t_span, plan: NoisePlan) -> Trajectory:
    """Euler-Maruyama with fixed step and additive Gaussian noise.

    Each step adds sigma*sqrt(dt)*xi per component on top of the drift;
    sigma = 0 reduces to deterministic fixed-step Euler. Identical plans
    (same seed) give bit-identical paths.
    """
    t0, tf = float(t_span[0]), float(t_span[1])
    if tf <= t0:
        raise ValueError("t_span must have t_end > t_start")
    y = np.asarray(s0, dtype=float).copy()
    dim = y.size
    sigma = np.broadcast_to(np.asarray(plan.sigma, dtype=float), (dim,)).copy()
    n = int(np.ceil((tf - t0) / plan.dt - 1e-12))
    rng = np.random.default_rng(plan.seed)
    noisy = bool(np.any(sigma > 0.0))

    times = np.empty(n + 1)
    states = np.empty((n + 1, dim))
    times[0] = t0
    states[0] = y
    t = t0
    for i in range(1, n + 1):
        dt = min(plan.dt, tf - t)
        y = y + dt * np.asarray(field(t, y), dtype=float)
        if noisy:
            y = y + sigma * np.sqrt(dt) * rng.standard_normal(dim)
        if not np.all(np.isfinite(y)):
            raise NonFiniteState("stochastic path became non-finite", t=t, state=y)
        t = t + dt
        times[i] = t
        states[i] = y
    return Trajectory(times, states, None, None)
