"""Integrator correctness against closed-form and library oracles."""

import numpy as np
import pytest
from scipy.linalg import expm

from jtenso.errors import NonFiniteState, StepSizeUnderflow
from jtenso.integrators import (
    IntegratorConfig,
    NoisePlan,
    integrate,
    integrate_sde,
    integrate_variational,
    liouville_defect,
)
from jtenso.model import flow_jacobian, flow_rhs
from jtenso.presets import CHAOTIC_SEED, as_array

A_LIN = np.array([[0.0, 1.0, 0.0], [-1.0, 0.0, 0.0], [0.0, 0.0, -0.5]])


def lin_field(t, s):
    return A_LIN @ s


def lin_jac(t, s):
    return A_LIN


def test_linear_system_endpoint_matches_expm():
    s0 = np.array([1.0, 0.0, 2.0])
    traj = integrate(lin_field, s0, (0.0, 3.0))
    exact = expm(3.0 * A_LIN) @ s0
    assert np.allclose(traj.states[-1], exact, rtol=0, atol=1e-9)


def test_dense_output_matches_nodes_and_oracle():
    s0 = np.array([1.0, 0.0, 2.0])
    traj = integrate(lin_field, s0, (0.0, 3.0))
    # at the accepted nodes the interpolant must reproduce the states exactly
    for i in (0, len(traj.times) // 2, -1):
        assert np.allclose(traj(traj.times[i]), traj.states[i], atol=1e-14)
    # between nodes it must track the closed-form solution
    for t in np.linspace(0.1, 2.9, 17):
        assert np.allclose(traj(t), expm(t * A_LIN) @ s0, atol=1e-8)


def test_interpolation_outside_span_raises():
    traj = integrate(lin_field, np.array([1.0, 0.0, 0.0]), (0.0, 1.0))
    with pytest.raises(ValueError):
        traj(-0.1)
    with pytest.raises(ValueError):
        traj(1.1)
    # the endpoints themselves are fine
    traj(0.0)
    traj(1.0)
    assert traj.t0 == 0.0 and traj.t_end == 1.0


def test_max_step_is_respected():
    cfg = IntegratorConfig(max_step=0.05)
    traj = integrate(lin_field, np.array([1.0, 0.0, 0.0]), (0.0, 1.0), cfg)
    assert np.max(np.diff(traj.times)) <= 0.05 + 1e-12


def test_tight_tolerance_reduces_error():
    s0 = np.array([1.0, 0.0, 2.0])
    exact = expm(3.0 * A_LIN) @ s0
    loose = integrate(lin_field, s0, (0.0, 3.0), IntegratorConfig(rtol=1e-6, atol=1e-8))
    tight = integrate(lin_field, s0, (0.0, 3.0), IntegratorConfig(rtol=1e-12, atol=1e-14))
    err_loose = np.linalg.norm(loose.states[-1] - exact)
    err_tight = np.linalg.norm(tight.states[-1] - exact)
    assert err_tight < err_loose


def test_blowup_raises_nonfinite_or_underflow():
    # y' = y^2 escapes to infinity before t = 1 from y(0) = 2
    def blowup(t, s):
        return s * s

    with pytest.raises((NonFiniteState, StepSizeUnderflow)):
        integrate(blowup, np.array([2.0, 0.0, 0.0]), (0.0, 2.0))


def test_degenerate_span_rejected():
    with pytest.raises(ValueError):
        integrate(lin_field, np.array([1.0, 0.0, 0.0]), (1.0, 1.0))
    with pytest.raises(ValueError):
        integrate(lin_field, np.array([1.0, 0.0, 0.0]), (2.0, 1.0))


def test_variational_linear_monodromy_is_expm():
    s0 = np.array([1.0, 0.0, 2.0])
    var = integrate_variational(lin_field, lin_jac, s0, (0.0, 2.0))
    assert np.allclose(var.final_matrix(), expm(2.0 * A_LIN), atol=1e-9)
    assert np.allclose(var.states[-1], expm(2.0 * A_LIN) @ s0, atol=1e-9)
    # the fundamental matrix starts from the identity
    assert np.allclose(var.fundamental_matrices[0], np.eye(3), atol=1e-14)


def test_liouville_defect_on_attractor_segment(p_ref):
    field = flow_rhs(p_ref)
    jac = flow_jacobian(p_ref)
    # settle onto the attractor first, then audit a 5-year stretch
    warm = integrate(field, as_array(CHAOTIC_SEED), (0.0, 40.0))
    var = integrate_variational(field, jac, warm.states[-1], (0.0, 5.0))
    assert liouville_defect(var, jac) < 1e-4


def test_sde_zero_noise_is_fixed_step_euler():
    plan = NoisePlan(sigma=0.0, dt=0.25, seed=7)
    traj = integrate_sde(lin_field, np.array([1.0, 0.0, 0.0]), (0.0, 1.0), plan)
    assert len(traj.times) == 5  # ceil(1.0 / 0.25) + initial point
    s = np.array([1.0, 0.0, 0.0])
    for i in range(4):
        s = s + 0.25 * lin_field(traj.times[i], s)
        assert np.allclose(traj.states[i + 1], s, atol=1e-14)


def test_sde_seed_reproducibility():
    s0 = np.array([1.0, 0.0, 0.0])
    plan = NoisePlan(sigma=0.1, dt=0.01, seed=42)
    a = integrate_sde(lin_field, s0, (0.0, 2.0), plan)
    b = integrate_sde(lin_field, s0, (0.0, 2.0), plan)
    assert np.array_equal(a.states, b.states) and np.array_equal(a.times, b.times)
    c = integrate_sde(lin_field, s0, (0.0, 2.0), NoisePlan(sigma=0.1, dt=0.01, seed=43))
    assert not np.array_equal(a.states, c.states)


def test_sde_noise_scale():
    # with sigma > 0 endpoints deviate from the deterministic path,
    # but only by O(sigma)
    s0 = np.array([1.0, 0.0, 0.0])
    det = integrate_sde(lin_field, s0, (0.0, 1.0), NoisePlan(sigma=0.0, dt=0.001, seed=1))
    noisy = integrate_sde(lin_field, s0, (0.0, 1.0), NoisePlan(sigma=0.01, dt=0.001, seed=1))
    dev = np.linalg.norm(noisy.states[-1] - det.states[-1])
    assert 0.0 < dev < 0.05
