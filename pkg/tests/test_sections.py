"""Section geometry, crossing detection, and curve fitting."""

import numpy as np
import pytest
from scipy.integrate import solve_ivp

from jtenso.artifacts import read_csv
from jtenso.errors import ConfigError, DegenerateGeometry, NoReturn, NotSaddleFocus
from jtenso.integrators import IntegratorConfig
from jtenso.model import EquilibriumInfo, flow_rhs
from jtenso.presets import MMO_SEED, RETURN_FP_POINT, RETURN_FP_SECTION_X, as_array
from jtenso.sections import (
    CROSSING_RESIDUAL,
    PlaneCurve,
    SectionSpec,
    approx_1d_return_map,
    detect_crossings,
    fit_quadratic,
    kth_return,
    seed_unstable_manifold,
    write_crossings_csv,
    write_map_csv,
    write_returns_csv,
)


def test_section_spec_geometry():
    sec = SectionSpec("x", -1.5, "decreasing")
    assert sec.coord_index == 0
    assert sec.direction_sign == -1
    assert sec.free_indices() == (1, 2)
    assert sec.residual([-1.4, 0.0, 0.0]) == pytest.approx(0.1)
    assert np.array_equal(sec.embed((0.3, 0.8)), [-1.5, 0.3, 0.8])
    secz = SectionSpec("z", 1.6)
    assert secz.coord_index == 2 and secz.direction_sign == 1
    assert secz.free_indices() == (0, 1)
    assert np.array_equal(secz.embed((-2.0, -0.5)), [-2.0, -0.5, 1.6])


@pytest.mark.parametrize(
    "kw",
    [
        dict(coordinate="w", value=0.0),
        dict(coordinate="x", value=0.0, direction="sideways"),
        dict(coordinate="x", value=float("nan")),
    ],
)
def test_section_spec_validation(kw):
    with pytest.raises(ConfigError):
        SectionSpec(**kw)


def test_crossings_match_solve_ivp_events(p_ref):
    # independent oracle: scipy's DOP853 event detection on the same field
    sec = SectionSpec("x", -1.5, "increasing")
    s0 = as_array(MMO_SEED)
    cfg = IntegratorConfig(rtol=1e-12, atol=1e-14)
    got = detect_crossings(s0, p_ref, sec, 30.0, cfg)

    field = flow_rhs(p_ref)

    def ev(t, s):
        return s[0] + 1.5

    ev.direction = 1.0
    sol = solve_ivp(field, (0.0, 30.0), s0, method="DOP853", events=ev,
                    rtol=1e-12, atol=1e-14, dense_output=True)
    ref_times = sol.t_events[0]
    assert len(got) == len(ref_times) == 3
    assert np.max(np.abs([c.t for c in got] - ref_times)) < 1e-8
    for c in got:
        assert abs(sec.residual(c.state)) < CROSSING_RESIDUAL
        assert c.direction == 1


def test_mmo_crossings_are_periodic(p_ref):
    sec = SectionSpec("x", -1.5, "increasing")
    got = detect_crossings(as_array(MMO_SEED), p_ref, sec, 120.0)
    gaps = np.diff([c.t for c in got])
    assert len(gaps) >= 8
    assert np.all(np.abs(gaps - 12.06) < 0.2)


def test_detect_crossings_truncates_at_max(p_ref):
    sec = SectionSpec("x", -1.5, "increasing")
    got = detect_crossings(as_array(MMO_SEED), p_ref, sec, 120.0, max_crossings=2)
    assert len(got) == 2


def test_detect_crossings_unreachable_plane(p_ref):
    sec = SectionSpec("x", 5.0, "increasing")
    assert detect_crossings(as_array(MMO_SEED), p_ref, sec, 30.0) == []


def test_both_direction_counts_each_sign(p_ref):
    sec_b = SectionSpec("x", -1.5, "both")
    sec_u = SectionSpec("x", -1.5, "increasing")
    sec_d = SectionSpec("x", -1.5, "decreasing")
    s0 = as_array(MMO_SEED)
    both = detect_crossings(s0, p_ref, sec_b, 60.0)
    ups = detect_crossings(s0, p_ref, sec_u, 60.0)
    downs = detect_crossings(s0, p_ref, sec_d, 60.0)
    assert len(both) == len(ups) + len(downs)
    assert sorted(c.t for c in both) == pytest.approx(
        sorted([c.t for c in ups] + [c.t for c in downs]), abs=1e-9
    )


def test_kth_return_fixed_point_comes_back(p_ref):
    sec = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    q = sec.embed(RETURN_FP_POINT)
    (r,) = kth_return([q], 1, sec, p_ref)
    assert np.linalg.norm(r.state_out - q) < 1e-6
    assert r.elapsed == pytest.approx(12.0562, abs=1e-3)
    assert r.k == 1 and np.array_equal(r.state_in, q)


def test_kth_return_composes(p_ref):
    sec = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    q = sec.embed((RETURN_FP_POINT[0], RETURN_FP_POINT[1] - 2e-4))
    (one,) = kth_return([q], 1, sec, p_ref)
    (two,) = kth_return([q], 2, sec, p_ref)
    (chained,) = kth_return([one.state_out], 1, sec, p_ref)
    assert np.linalg.norm(two.state_out - chained.state_out) < 1e-6
    assert two.elapsed == pytest.approx(one.elapsed + chained.elapsed, abs=1e-6)


def test_kth_return_validation(p_ref):
    sec = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    q = sec.embed(RETURN_FP_POINT)
    with pytest.raises(ConfigError):
        kth_return([q], 0, sec, p_ref)
    off = q + np.array([1e-3, 0.0, 0.0])
    with pytest.raises(ConfigError):
        kth_return([off], 1, sec, p_ref)


def test_kth_return_no_return_before_t_max(p_ref):
    # the return time is ~12, so a patience of 5 must fail
    sec = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    q = sec.embed(RETURN_FP_POINT)
    with pytest.raises(NoReturn):
        kth_return([q], 1, sec, p_ref, t_max=5.0)


def test_manifold_seeds_geometry(eq_ref):
    pts = seed_unstable_manifold(eq_ref, 1e-3, 16)
    assert pts.shape == (16, 3)
    offsets = pts - eq_ref.state
    assert np.allclose(np.linalg.norm(offsets, axis=1), 1e-3, atol=1e-12)
    # the circle lies in the eigenplane, whose unit normal is the
    # observable direction
    assert np.max(np.abs(offsets @ eq_ref.observable_direction)) < 1e-12
    with pytest.raises(ConfigError):
        seed_unstable_manifold(eq_ref, 1e-3, 0)


def test_manifold_seeds_need_unstable_focus(eq_ref):
    all_real = EquilibriumInfo(
        state=eq_ref.state,
        eigenvalues=np.array([-1.0, -2.0, 0.5], dtype=complex),
        eigenvectors=np.eye(3, dtype=complex),
        observable_direction=None,
        residual=0.0,
    )
    with pytest.raises(NotSaddleFocus):
        seed_unstable_manifold(all_real, 1e-3, 8)

    stable_pair = EquilibriumInfo(
        state=eq_ref.state,
        eigenvalues=np.array([-1.0, -0.1 + 2j, -0.1 - 2j]),
        eigenvectors=eq_ref.eigenvectors,
        observable_direction=eq_ref.observable_direction,
        residual=0.0,
    )
    with pytest.raises(NotSaddleFocus):
        seed_unstable_manifold(stable_pair, 1e-3, 8)


def test_fit_quadratic_line_is_exact():
    t = np.linspace(0.0, 1.0, 9)
    pts = np.column_stack([0.2 + 0.5 * t, -1.0 + 2.0 * t])
    curve = fit_quadratic(pts)
    assert curve.rms_residual < 1e-12
    assert curve.s_max == pytest.approx(np.hypot(0.5, 2.0), rel=1e-12)
    assert curve.length == pytest.approx(curve.s_max, rel=1e-9)


def test_fit_quadratic_recovers_shallow_parabola():
    u = np.linspace(-0.5, 0.5, 21)
    v = 0.05 * u * u
    curve = fit_quadratic(np.column_stack([u, v]))
    assert curve.rms_residual < 1e-4
    # true arclength by dense polyline on the generating curve
    uu = np.linspace(-0.5, 0.5, 4001)
    true_len = np.sum(np.hypot(np.diff(uu), np.diff(0.05 * uu * uu)))
    assert curve.length == pytest.approx(true_len, rel=1e-3)
    # fitted curve passes near the input points
    mid = curve.point(curve.s_max / 2.0)
    assert abs(mid[1] - 0.05 * mid[0] ** 2) < 1e-4


def test_fit_quadratic_order_invariant(rng):
    u = np.linspace(-0.5, 0.5, 15)
    pts = np.column_stack([u, 0.05 * u * u])
    a = fit_quadratic(pts)
    b = fit_quadratic(pts[rng.permutation(len(pts))])
    assert a.s_max == pytest.approx(b.s_max, abs=1e-12)
    assert a.rms_residual == pytest.approx(b.rms_residual, abs=1e-12)
    assert a.length == pytest.approx(b.length, abs=1e-12)


def test_fit_quadratic_degenerate_inputs():
    with pytest.raises(ConfigError):
        fit_quadratic(np.zeros((4, 3)))
    with pytest.raises(DegenerateGeometry):
        fit_quadratic([[0.0, 0.0], [1.0, 1.0]])
    with pytest.raises(DegenerateGeometry):
        fit_quadratic(np.zeros((5, 2)))  # coincident points
    with pytest.raises(DegenerateGeometry):
        fit_quadratic([[0.0, 0.0], [0.0, 0.0], [1.0, 0.0]])  # 2 distinct stations


def test_plane_curve_polynomial_algebra():
    # straight segment u(s) = s, v(s) = 0 of length 2
    seg = PlaneCurve(
        coeffs_u=np.array([0.0, 1.0, 0.0]),
        coeffs_v=np.array([0.0, 0.0, 0.0]),
        s_max=2.0,
        rms_residual=0.0,
        points=np.zeros((3, 2)),
    )
    assert np.allclose(seg.point(1.5), [1.5, 0.0])
    samples = seg.sample(5)
    assert samples.shape == (5, 2)
    assert np.allclose(samples[:, 0], [0.0, 0.5, 1.0, 1.5, 2.0])
    assert seg.length == pytest.approx(2.0, rel=1e-12)


def test_approx_1d_return_map_near_fixed_point(p_ref):
    sec = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    y0, z0 = RETURN_FP_POINT
    pts = np.array([[y0, z0 - 4e-4], [y0, z0], [y0, z0 + 4e-4]])
    v_in, v_ret = approx_1d_return_map(pts, sec, p_ref)
    assert np.all(np.diff(v_in) > 0)
    assert np.all(np.isfinite(v_ret))
    # the middle sample is the fixed point of the return map
    assert v_ret[1] == pytest.approx(z0, abs=1e-4)


def test_section_csv_writers(tmp_path, p_ref):
    sec = SectionSpec("x", -1.5, "increasing")
    crossings = detect_crossings(as_array(MMO_SEED), p_ref, sec, 30.0)
    header, rows = read_csv(write_crossings_csv(tmp_path / "c.csv", crossings))
    assert header == ["t", "x", "y", "z", "dir"]
    assert len(rows) == len(crossings)
    assert float(rows[0][0]) == pytest.approx(crossings[0].t)

    secd = SectionSpec("x", RETURN_FP_SECTION_X, "decreasing")
    samples = kth_return([secd.embed(RETURN_FP_POINT)], 1, secd, p_ref)
    header, rows = read_csv(write_returns_csv(tmp_path / "r.csv", samples))
    assert header == ["y_in", "z_in", "y_out", "z_out", "dt"]
    assert float(rows[0][4]) == pytest.approx(samples[0].elapsed)

    header, rows = read_csv(write_map_csv(tmp_path / "m.csv", [0.83, 0.84], [0.835, 0.836]))
    assert header == ["z_in", "z_ret"]
    assert [float(r[0]) for r in rows] == [0.83, 0.84]
