"""The dimensionless recharge-oscillator vector field and its equilibria.

State components:
    x   east-west sea surface temperature difference
    y   western-basin sea surface temperature anomaly
    z   western-basin thermocline depth

Raw equations (the model's fast dimensionless clock):

    x' = rho*delta*(x^2 - a*x) + x*(x + y + c - c*tanh(x + z))
    y' = -rho*delta*(a*y + x^2)
    z' = delta*(k - z - x/2)

Time conventions. Three clocks appear in practice and this module is the
single place where they are defined:

* the raw clock of the equations above;
* the slow clock, raw time multiplied by delta, in which the thermocline
  relaxes at unit rate; equilibrium eigen-rates are reported on this clock
  (see equilibrium_eigenstructure);
* the calendar clock ("model years") used by every trajectory-producing
  operation. One year equals 2*pi/(OMEGA_CAL*delta) raw units, i.e. the
  calendar is normalized so that an oscillation with angular frequency
  OMEGA_CAL = 1.8 on the slow clock has a period of one year. Under this
  calendar the model's phenomenology sits where it should: the fast
  oscillations are sub-annual (period about 0.40 years at the reference
  parameters) and strong-event recurrence is interannual (about 12 years).

States are plain numpy arrays of shape (3,) ordered (x, y, z).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .eig3 import eig3
from .errors import NoConvergence, NotSaddleFocus, SingularJacobian

# Calendar convention: angular frequency on the slow clock whose period
# defines one model year.
OMEGA_CAL = 1.8

# Reference parameter point studied throughout: both attractors coexist.
REFERENCE = (0.225423, 0.3224, 2.3952, 0.4032, 7.3939)


@dataclass(frozen=True)
class ModelParams:
    """The five dimensionless model parameters."""

    delta: float
    rho: float
    c: float
    k: float
    a: float

    def __post_init__(self):
        vals = (self.delta, self.rho, self.c, self.k, self.a)
        if not all(math.isfinite(v) for v in vals):
            raise ValueError("model parameters must be finite")
        if self.delta <= 0 or self.rho <= 0:
            raise ValueError("delta and rho must be positive")

    def replace(self, **kw) -> "ModelParams":
        fields = dict(
            delta=self.delta, rho=self.rho, c=self.c, k=self.k, a=self.a
        )
        fields.update(kw)
        return ModelParams(**fields)

    @classmethod
    def reference(cls) -> "ModelParams":
        return cls(*REFERENCE)


@dataclass(frozen=True)
class Forcing:
    """Sinusoidal modulation of the parameter a, plus optional noise.

    a(t) = a0 + amplitude*sin(omega*t) with t in model years. omega is an
    angular frequency per model year and is applied to the formula exactly
    as written; note that omega = 1.8 therefore gives a period of
    2*pi/1.8 = 3.49 years on the calendar clock, not one year. noise_sigma
    is the per-component scale of additive white noise used by the
    stochastic integrator.
    """

    a0: float
    amplitude: float = 0.0
    omega: float = OMEGA_CAL
    noise_sigma: float = 0.0
    seed: int = 0

    def __post_init__(self):
        if self.amplitude < 0:
            raise ValueError("forcing amplitude must be nonnegative")
        if self.noise_sigma < 0:
            raise ValueError("noise_sigma must be nonnegative")

    @property
    def is_trivial(self) -> bool:
        return self.amplitude == 0.0 and self.noise_sigma == 0.0


@dataclass(frozen=True)
class EquilibriumInfo:
    """A converged equilibrium with its linearization attached.

    eigenvalues are rates on the slow clock (see module docstring); they
    are sorted real-first. observable_direction is the unit vector normal
    to the plane spanned by the complex eigenvector's real and imaginary
    parts, with positive z component; it is None when all eigenvalues are
    real.
    """

    state: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    observable_direction: np.ndarray | None
    residual: float

    @property
    def is_saddle_focus(self) -> bool:
        return bool(np.any(self.eigenvalues.imag != 0.0))


def vector_field(s, p: ModelParams, a: float | None = None) -> np.ndarray:
    """Raw-clock derivative (x', y', z') at state s."""
    x, y, z = s
    aa = p.a if a is None else a
    common = x + y + p.c - p.c * np.tanh(x + z)
    return np.array(
        [
            p.rho * p.delta * (x * x - aa * x) + x * common,
            -p.rho * p.delta * (aa * y + x * x),
            p.delta * (p.k - z - 0.5 * x),
        ]
    )


def jacobian(s, p: ModelParams, a: float | None = None) -> np.ndarray:
    """Analytic raw-clock Jacobian of vector_field at state s."""
    x, y, z = s
    aa = p.a if a is None else a
    th = np.tanh(x + z)
    sech2 = 1.0 - th * th
    dxdx = (
        p.rho * p.delta * (2.0 * x - aa)
        + (x + y + p.c - p.c * th)
        + x * (1.0 - p.c * sech2)
    )
    return np.array(
        [
            [dxdx, x, -x * p.c * sech2],
            [-2.0 * p.rho * p.delta * x, -p.rho * p.delta * aa, 0.0],
            [-0.5 * p.delta, 0.0, -p.delta],
        ]
    )


def a_of_t(t, f: Forcing):
    """Forcing formula a0 + amplitude*sin(omega*t); t in model years."""
    if f.amplitude == 0.0:
        return f.a0 if np.isscalar(t) else np.full_like(np.asarray(t, float), f.a0)
    return f.a0 + f.amplitude * np.sin(f.omega * np.asarray(t))


def raw_per_year(p: ModelParams) -> float:
    """Raw-equation time units per model year (see module docstring)."""
    return 2.0 * np.pi / (OMEGA_CAL * p.delta)


def flow_rhs(p: ModelParams, forcing: Forcing | None = None):
    """Calendar-clock right-hand side f(t, s) for the integrators.

    Without forcing the field is autonomous; with forcing the parameter a
    follows a_of_t. The returned callable closes over plain floats only,
    so it is cheap to call and safe to share across workers.
    """
    scale = raw_per_year(p)
    if forcing is None or forcing.amplitude == 0.0:
        a0 = p.a if forcing is None else forcing.a0
        pa = p.replace(a=a0)

        def rhs(t, s):
            return scale * vector_field(s, pa)

        return rhs

    def rhs(t, s):
        return scale * vector_field(s, p, a=a_of_t(t, forcing))

    return rhs


def flow_jacobian(p: ModelParams, forcing: Forcing | None = None):
    """Calendar-clock Jacobian d(flow_rhs)/ds as a callable J(t, s)."""
    scale = raw_per_year(p)
    if forcing is None or forcing.amplitude == 0.0:
        a0 = p.a if forcing is None else forcing.a0
        pa = p.replace(a=a0)

        def jac(t, s):
            return scale * jacobian(s, pa)

        return jac

    def jac(t, s):
        return scale * jacobian(s, p, a=a_of_t(t, forcing))

    return jac


def equilibrium_eigenstructure(state, p: ModelParams):
    """Slow-clock eigen-decomposition at an equilibrium state.

    Returns (eigenvalues, eigenvectors, observable_direction). The
    eigenvalues are those of jacobian/delta: rates per slow-time unit,
    the normalization in which the thermocline equation relaxes at unit
    rate. The observable direction is the unit normal to the complex
    pair's eigenplane, signed so its z component is positive; projecting
    states onto it yields a scalar that separates the model's two
    oscillation regimes cleanly.
    """
    j = jacobian(state, p) / p.delta
    values, vectors = eig3(j)
    direction = None
    for i, lam in enumerate(values):
        if lam.imag > 0.0:
            v = vectors[:, i]
            normal = np.cross(v.real, v.imag)
            norm = np.linalg.norm(normal)
            if norm == 0.0:
                raise NotSaddleFocus("complex eigenplane is degenerate")
            direction = normal / norm
            if direction[2] < 0.0:
                direction = -direction
            break
    return values, vectors, direction


def find_equilibrium(
    p: ModelParams,
    guess,
    tol: float = 1e-12,
    max_iter: int = 50,
) -> EquilibriumInfo:
    """Newton iteration on the raw vector field from a user guess.

    The raw and calendar fields share roots, so Newton runs on the raw
    field where the Jacobian entries are O(1). Raises NoConvergence when
    the residual stays above tol for max_iter steps and SingularJacobian
    when a Newton solve hits a numerically singular matrix.
    """
    s = np.asarray(guess, dtype=float).copy()
    for _ in range(max_iter):
        r = vector_field(s, p)
        if np.linalg.norm(r) < tol:
            values, vectors, direction = equilibrium_eigenstructure(s, p)
            return EquilibriumInfo(
                state=s,
                eigenvalues=values,
                eigenvectors=vectors,
                observable_direction=direction,
                residual=float(np.linalg.norm(vector_field(s, p))),
            )
        j = jacobian(s, p)
        try:
            step = np.linalg.solve(j, r)
        except np.linalg.LinAlgError as exc:
            raise SingularJacobian(
                f"singular Jacobian during equilibrium Newton at {s}"
            ) from exc
        s = s - step
        if not np.all(np.isfinite(s)):
            raise NoConvergence(
                "equilibrium Newton produced non-finite iterate",
                residual=float("nan"),
            )
    raise NoConvergence(
        f"equilibrium Newton did not reach tol={tol} in {max_iter} steps",
        residual=float(np.linalg.norm(vector_field(s, p))),
        iterations=max_iter,
    )
