"""Compiled integration kernels specialized to the model equations.

Grid experiments visit tens of thousands of initial conditions and the
epoch statistics need 1e5-year runs, so the hot paths are jitted with
numba. Every kernel reimplements the same Dormand-Prince 5(4) scheme as
integrators.py (identical tableau, error norm, and PI controller); the
test suite cross-validates the two implementations against each other and
against an independent library solver.

Parameter packing: kernels take an 8-vector
    P = [delta, rho, c, k, a0, amplitude, omega, scale]
where scale converts the raw right-hand side to the calendar clock
(scale = raw_per_year) and a(t) = a0 + amplitude*sin(omega*t). Kernels
return status codes instead of raising: 0 ok, 1 non-finite state,
2 step-size underflow, 3 output buffer full. The python wrappers at the
bottom translate these into the shared exception types.
"""

from __future__ import annotations

import numpy as np
from numba import njit

from .errors import NonFiniteState, StepSizeUnderflow
from .model import OMEGA_CAL, ModelParams, Forcing, raw_per_year

# Dormand-Prince 5(4) tableau, duplicated from integrators.py on purpose:
# kernels must stay importable without triggering module-level jit of
# anything but themselves.
_C2, _C3, _C4, _C5 = 0.2, 0.3, 0.8, 8.0 / 9.0
_A21 = 0.2
_A31, _A32 = 3.0 / 40.0, 9.0 / 40.0
_A41, _A42, _A43 = 44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0
_A51, _A52, _A53, _A54 = 19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0
_A61, _A62, _A63, _A64, _A65 = (
    9017.0 / 3168.0,
    -355.0 / 33.0,
    46732.0 / 5247.0,
    49.0 / 176.0,
    -5103.0 / 18656.0,
)
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71.0 / 57600.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
)

_P_DENSE = np.array(
    [
        [1.0, -8048581381.0 / 2820520608.0, 8663915743.0 / 2820520608.0, -12715105075.0 / 11282082432.0],
        [0.0, 0.0, 0.0, 0.0],
        [0.0, 131558114200.0 / 32700410799.0, -68118460800.0 / 10900136933.0, 87487479700.0 / 32700410799.0],
        [0.0, -1754552775.0 / 470086768.0, 14199869525.0 / 1410260304.0, -10690763975.0 / 1880347072.0],
        [0.0, 127303824393.0 / 49829197408.0, -318862633887.0 / 49829197408.0, 701980252875.0 / 199316789632.0],
        [0.0, -282668133.0 / 205662961.0, 2019193451.0 / 616988883.0, -1453857185.0 / 822651844.0],
        [0.0, 40617522.0 / 29380423.0, -110615467.0 / 29380423.0, 69997945.0 / 29380423.0],
    ]
)

_A_LOW = np.zeros((6, 6))
_A_LOW[1, 0] = _A21
_A_LOW[2, 0], _A_LOW[2, 1] = _A31, _A32
_A_LOW[3, 0], _A_LOW[3, 1], _A_LOW[3, 2] = _A41, _A42, _A43
_A_LOW[4, 0], _A_LOW[4, 1], _A_LOW[4, 2], _A_LOW[4, 3] = _A51, _A52, _A53, _A54
_A_LOW[5, 0], _A_LOW[5, 1], _A_LOW[5, 2], _A_LOW[5, 3], _A_LOW[5, 4] = (
    _A61,
    _A62,
    _A63,
    _A64,
    _A65,
)
_C_NODES = np.array([0.0, _C2, _C3, _C4, _C5, 1.0])

_SAFETY = 0.9
_BETA = 0.04
_EXPO = 0.2 - 0.75 * _BETA
_EPS = np.finfo(np.float64).eps

STATUS_OK = 0
STATUS_NONFINITE = 1
STATUS_UNDERFLOW = 2
STATUS_FULL = 3


@njit(cache=True, inline="always")
def _rhs(t, x, y, z, P):
    a = P[4]
    if P[5] != 0.0:
        a = P[4] + P[5] * np.sin(P[6] * t)
    common = x + y + P[2] - P[2] * np.tanh(x + z)
    dx = P[1] * P[0] * (x * x - a * x) + x * common
    dy = -P[1] * P[0] * (a * y + x * x)
    dz = P[0] * (P[3] - z - 0.5 * x)
    s = P[7]
    return s * dx, s * dy, s * dz


@njit(cache=True, inline="always")
def _jac_rows(t, x, y, z, P):
    """Calendar-clock Jacobian entries (row-major 9-tuple)."""
    a = P[4]
    if P[5] != 0.0:
        a = P[4] + P[5] * np.sin(P[6] * t)
    th = np.tanh(x + z)
    sech2 = 1.0 - th * th
    s = P[7]
    j11 = s * (P[1] * P[0] * (2.0 * x - a) + (x + y + P[2] - P[2] * th) + x * (1.0 - P[2] * sech2))
    j12 = s * x
    j13 = s * (-x * P[2] * sech2)
    j21 = s * (-2.0 * P[1] * P[0] * x)
    j22 = s * (-P[1] * P[0] * a)
    j23 = 0.0
    j31 = s * (-0.5 * P[0])
    j32 = 0.0
    j33 = s * (-P[0])
    return j11, j12, j13, j21, j22, j23, j31, j32, j33


@njit(cache=True)
def _step3(t, x, y, z, h, K, P):
    """One DOPRI5 stage sweep for the 3-dim state.

    K[0] must hold the derivative at (t, x, y, z) on entry (FSAL). Fills
    K[1..6], returns the order-5 proposal and the embedded error.
    """
    k1x, k1y, k1z = K[0, 0], K[0, 1], K[0, 2]
    xs = x + h * _A21 * k1x
    ys = y + h * _A21 * k1y
    zs = z + h * _A21 * k1z
    k2x, k2y, k2z = _rhs(t + _C2 * h, xs, ys, zs, P)
    xs = x + h * (_A31 * k1x + _A32 * k2x)
    ys = y + h * (_A31 * k1y + _A32 * k2y)
    zs = z + h * (_A31 * k1z + _A32 * k2z)
    k3x, k3y, k3z = _rhs(t + _C3 * h, xs, ys, zs, P)
    xs = x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x)
    ys = y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y)
    zs = z + h * (_A41 * k1z + _A42 * k2z + _A43 * k3z)
    k4x, k4y, k4z = _rhs(t + _C4 * h, xs, ys, zs, P)
    xs = x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x)
    ys = y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y)
    zs = z + h * (_A51 * k1z + _A52 * k2z + _A53 * k3z + _A54 * k4z)
    k5x, k5y, k5z = _rhs(t + _C5 * h, xs, ys, zs, P)
    xs = x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x)
    ys = y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y)
    zs = z + h * (_A61 * k1z + _A62 * k2z + _A63 * k3z + _A64 * k4z + _A65 * k5z)
    k6x, k6y, k6z = _rhs(t + h, xs, ys, zs, P)
    xn = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
    yn = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
    zn = z + h * (_B1 * k1z + _B3 * k3z + _B4 * k4z + _B5 * k5z + _B6 * k6z)
    k7x, k7y, k7z = _rhs(t + h, xn, yn, zn, P)
    K[1, 0], K[1, 1], K[1, 2] = k2x, k2y, k2z
    K[2, 0], K[2, 1], K[2, 2] = k3x, k3y, k3z
    K[3, 0], K[3, 1], K[3, 2] = k4x, k4y, k4z
    K[4, 0], K[4, 1], K[4, 2] = k5x, k5y, k5z
    K[5, 0], K[5, 1], K[5, 2] = k6x, k6y, k6z
    K[6, 0], K[6, 1], K[6, 2] = k7x, k7y, k7z
    ex = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
    ey = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
    ez = h * (_E1 * k1z + _E3 * k3z + _E4 * k4z + _E5 * k5z + _E6 * k6z + _E7 * k7z)
    return xn, yn, zn, ex, ey, ez


@njit(cache=True, inline="always")
def _err_norm3(ex, ey, ez, x0, y0, z0, x1, y1, z1, rtol, atol):
    sx = atol + rtol * max(abs(x0), abs(x1))
    sy = atol + rtol * max(abs(y0), abs(y1))
    sz = atol + rtol * max(abs(z0), abs(z1))
    return np.sqrt(((ex / sx) ** 2 + (ey / sy) ** 2 + (ez / sz) ** 2) / 3.0)


@njit(cache=True, inline="always")
def _dense3(K, x0, y0, z0, h, u):
    """Quartic dense-output evaluation at fraction u of the step."""
    u2 = u * u
    u3 = u2 * u
    u4 = u3 * u
    x = x0
    y = y0
    z = z0
    for s in range(7):
        q = (
            _P_DENSE[s, 0] * u
            + _P_DENSE[s, 1] * u2
            + _P_DENSE[s, 2] * u3
            + _P_DENSE[s, 3] * u4
        )
        x += h * q * K[s, 0]
        y += h * q * K[s, 1]
        z += h * q * K[s, 2]
    return x, y, z


@njit(cache=True, inline="always")
def _initial_h3(t0, x, y, z, fx, fy, fz, rtol, atol, max_step):
    sx = atol + rtol * abs(x)
    sy = atol + rtol * abs(y)
    sz = atol + rtol * abs(z)
    d0 = np.sqrt(((x / sx) ** 2 + (y / sy) ** 2 + (z / sz) ** 2) / 3.0)
    d1 = np.sqrt(((fx / sx) ** 2 + (fy / sy) ** 2 + (fz / sz) ** 2) / 3.0)
    if d0 < 1e-5 or d1 < 1e-5:
        h0 = 1e-6
    else:
        h0 = 0.01 * d0 / d1
    return min(h0, max_step)


@njit(cache=True)
def integrate_final_k(x0, y0, z0, t0, t1, P, rtol, atol, max_step):
    """Advance to t1, returning only the endpoint state."""
    x, y, z = x0, y0, z0
    t = t0
    K = np.empty((7, 3))
    fx, fy, fz = _rhs(t, x, y, z, P)
    K[0, 0], K[0, 1], K[0, 2] = fx, fy, fz
    h = min(_initial_h3(t, x, y, z, fx, fy, fz, rtol, atol, max_step), t1 - t0)
    facold = 1e-4
    while t < t1:
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return x, y, z, STATUS_UNDERFLOW
        xn, yn, zn, ex, ey, ez = _step3(t, x, y, z, h, K, P)
        if not (np.isfinite(xn) and np.isfinite(yn) and np.isfinite(zn)):
            return x, y, z, STATUS_NONFINITE
        err = _err_norm3(ex, ey, ez, x, y, z, xn, yn, zn, rtol, atol)
        if err <= 1.0:
            t += h
            x, y, z = xn, yn, zn
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    return x, y, z, STATUS_OK


@njit(cache=True)
def sample_observable_k(x0, y0, z0, t0, t1, dt, dx, dy, dz, P, rtol, atol, max_step):
    """Project the trajectory onto a fixed direction at a uniform grid.

    Returns (g, status, xf, yf, zf) where g[i] is the projection at
    t0 + i*dt, including both endpoints.
    """
    n = int(round((t1 - t0) / dt)) + 1
    g = np.empty(n)
    g[0] = dx * x0 + dy * y0 + dz * z0
    isamp = 1
    x, y, z = x0, y0, z0
    t = t0
    K = np.empty((7, 3))
    fx, fy, fz = _rhs(t, x, y, z, P)
    K[0, 0], K[0, 1], K[0, 2] = fx, fy, fz
    h = min(_initial_h3(t, x, y, z, fx, fy, fz, rtol, atol, max_step), t1 - t0)
    facold = 1e-4
    while t < t1 and isamp < n:
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return g[:isamp], STATUS_UNDERFLOW, x, y, z
        xn, yn, zn, ex, ey, ez = _step3(t, x, y, z, h, K, P)
        if not (np.isfinite(xn) and np.isfinite(yn) and np.isfinite(zn)):
            return g[:isamp], STATUS_NONFINITE, x, y, z
        err = _err_norm3(ex, ey, ez, x, y, z, xn, yn, zn, rtol, atol)
        if err <= 1.0:
            t_new = t + h
            while isamp < n:
                ts = t0 + isamp * dt
                if ts > t_new + 1e-12:
                    break
                u = (ts - t) / h
                if u > 1.0:
                    u = 1.0
                xs, ys, zs = _dense3(K, x, y, z, h, u)
                g[isamp] = dx * xs + dy * ys + dz * zs
                isamp += 1
            t = t_new
            x, y, z = xn, yn, zn
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    return g[:isamp], STATUS_OK, x, y, z


@njit(cache=True)
def sample_states_k(x0, y0, z0, t0, t1, dt, P, rtol, atol, max_step):
    """Full states at a uniform grid (t0 + i*dt, endpoints included)."""
    n = int(round((t1 - t0) / dt)) + 1
    out = np.empty((n, 3))
    out[0, 0], out[0, 1], out[0, 2] = x0, y0, z0
    isamp = 1
    x, y, z = x0, y0, z0
    t = t0
    K = np.empty((7, 3))
    fx, fy, fz = _rhs(t, x, y, z, P)
    K[0, 0], K[0, 1], K[0, 2] = fx, fy, fz
    h = min(_initial_h3(t, x, y, z, fx, fy, fz, rtol, atol, max_step), t1 - t0)
    facold = 1e-4
    while t < t1 and isamp < n:
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return out[:isamp], STATUS_UNDERFLOW
        xn, yn, zn, ex, ey, ez = _step3(t, x, y, z, h, K, P)
        if not (np.isfinite(xn) and np.isfinite(yn) and np.isfinite(zn)):
            return out[:isamp], STATUS_NONFINITE
        err = _err_norm3(ex, ey, ez, x, y, z, xn, yn, zn, rtol, atol)
        if err <= 1.0:
            t_new = t + h
            while isamp < n:
                ts = t0 + isamp * dt
                if ts > t_new + 1e-12:
                    break
                u = (ts - t) / h
                if u > 1.0:
                    u = 1.0
                xs, ys, zs = _dense3(K, x, y, z, h, u)
                out[isamp, 0], out[isamp, 1], out[isamp, 2] = xs, ys, zs
                isamp += 1
            t = t_new
            x, y, z = xn, yn, zn
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    return out[:isamp], STATUS_OK


@njit(cache=True, inline="always")
def _coord(x, y, z, idx):
    if idx == 0:
        return x
    if idx == 1:
        return y
    return z


@njit(cache=True)
def _refine_crossing(K, x, y, z, h, coord, value, ua, ub):
    """Bisect the dense interpolant until the residual is below 1e-10."""
    xa, ya, za = _dense3(K, x, y, z, h, ua)
    ca = _coord(xa, ya, za, coord) - value
    for _ in range(200):
        um = 0.5 * (ua + ub)
        xm, ym, zm = _dense3(K, x, y, z, h, um)
        cm = _coord(xm, ym, zm, coord) - value
        if abs(cm) < 1e-10 and (ub - ua) * abs(h) < 1e-9:
            return um
        if (ca <= 0.0) == (cm <= 0.0):
            ua = um
            ca = cm
        else:
            ub = um
    return 0.5 * (ua + ub)


@njit(cache=True)
def collect_crossings_k(
    x0, y0, z0, t0, t1, coord, value, direction, nmax, P, rtol, atol, max_step
):
    """Record refined section crossings along the flow.

    direction: +1 keeps increasing crossings, -1 decreasing, 0 both. Each
    accepted step is scanned on 8 dense-output subintervals so that two
    nearby crossings inside one step are not lost. Returns
    (times, states, signs, count, status, final_state).
    """
    ts = np.empty(nmax)
    ss = np.empty((nmax, 3))
    ds = np.empty(nmax, dtype=np.int8)
    count = 0

    x, y, z = x0, y0, z0
    t = t0
    K = np.empty((7, 3))
    fx, fy, fz = _rhs(t, x, y, z, P)
    K[0, 0], K[0, 1], K[0, 2] = fx, fy, fz
    h = min(_initial_h3(t, x, y, z, fx, fy, fz, rtol, atol, max_step), t1 - t0)
    facold = 1e-4
    final = np.empty(3)
    while t < t1:
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            final[0], final[1], final[2] = x, y, z
            return ts[:count], ss[:count], ds[:count], count, STATUS_UNDERFLOW, final
        xn, yn, zn, ex, ey, ez = _step3(t, x, y, z, h, K, P)
        if not (np.isfinite(xn) and np.isfinite(yn) and np.isfinite(zn)):
            final[0], final[1], final[2] = x, y, z
            return ts[:count], ss[:count], ds[:count], count, STATUS_NONFINITE, final
        err = _err_norm3(ex, ey, ez, x, y, z, xn, yn, zn, rtol, atol)
        if err <= 1.0:
            # scan the accepted step for sign changes
            prev = _coord(x, y, z, coord) - value
            uprev = 0.0
            for j in range(1, 9):
                u = j / 8.0
                if j == 8:
                    cur = _coord(xn, yn, zn, coord) - value
                else:
                    xu, yu, zu = _dense3(K, x, y, z, h, u)
                    cur = _coord(xu, yu, zu, coord) - value
                # strict sign change: a launch sitting exactly on the
                # section (prev == 0) must not count as a crossing
                up = prev < 0.0 and cur >= 0.0
                dn = prev > 0.0 and cur <= 0.0
                if up or dn:
                    sign = 1 if up else -1
                    if direction == 0 or sign == direction:
                        if count >= nmax:
                            final[0], final[1], final[2] = x, y, z
                            return (
                                ts[:count],
                                ss[:count],
                                ds[:count],
                                count,
                                STATUS_FULL,
                                final,
                            )
                        uc = _refine_crossing(K, x, y, z, h, coord, value, uprev, u)
                        tc = t + uc * h
                        if tc - t0 > 1e-9:
                            xc, yc, zc = _dense3(K, x, y, z, h, uc)
                            ts[count] = tc
                            ss[count, 0], ss[count, 1], ss[count, 2] = xc, yc, zc
                            ds[count] = sign
                            count += 1
                prev = cur
                uprev = u
            t = t + h
            x, y, z = xn, yn, zn
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    final[0], final[1], final[2] = x, y, z
    return ts[:count], ss[:count], ds[:count], count, STATUS_OK, final


@njit(cache=True)
def evidence_k(
    x0,
    y0,
    z0,
    transient,
    window,
    P,
    rtol,
    atol,
    max_step,
    event_level,
    section_value,
    early_exit,
):
    """Classification evidence over a post-transient window.

    Tracks upward crossings of x = event_level (strong events, times
    refined on the dense output), local maxima of x below the level
    (sub-threshold oscillations), the largest x, divergence, and the z
    values of increasing crossings of x = section_value for a recurrence
    test (periods 1..8, tolerance 1e-4, checked over the newest 16
    returns).

    Returns (max_x, n_events, n_small_max, period, diverged, mean_gap,
    status). period is 0 when the return-z sequence is not periodic;
    mean_gap is the mean time between consecutive events (0 if fewer than
    two events).
    """
    x, y, z = x0, y0, z0
    t = 0.0
    K = np.empty((7, 3))
    fx, fy, fz = _rhs(t, x, y, z, P)
    K[0, 0], K[0, 1], K[0, 2] = fx, fy, fz
    t1 = transient + window
    h = min(_initial_h3(t, x, y, z, fx, fy, fz, rtol, atol, max_step), t1)
    facold = 1e-4

    max_x = -1e300
    n_events = 0
    n_small_max = 0
    first_event_t = -1.0
    last_event_t = -1.0
    diverged = False

    ring = np.empty(64)
    ring_n = 0

    xm2 = x
    xm1 = x
    have2 = 0

    while t < t1:
        if h > t1 - t:
            h = t1 - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return max_x, n_events, n_small_max, 0, diverged, 0.0, STATUS_UNDERFLOW
        xn, yn, zn, ex, ey, ez = _step3(t, x, y, z, h, K, P)
        if not (np.isfinite(xn) and np.isfinite(yn) and np.isfinite(zn)):
            return max_x, n_events, n_small_max, 0, True, 0.0, STATUS_NONFINITE
        err = _err_norm3(ex, ey, ez, x, y, z, xn, yn, zn, rtol, atol)
        if err <= 1.0:
            if abs(xn) > 1e3 or abs(yn) > 1e3 or abs(zn) > 1e3:
                diverged = True
                return max_x, n_events, n_small_max, 0, True, 0.0, STATUS_OK
            if t >= transient:
                if xn > max_x:
                    max_x = xn
                # scan the step for upward crossings of the event level and
                # of the recurrence section; only the x component is needed
                # for bracketing, so collapse the dense output to a single
                # quartic in u and evaluate the full state on hits only
                cq0 = 0.0
                cq1 = 0.0
                cq2 = 0.0
                cq3 = 0.0
                for s in range(7):
                    ks = K[s, 0]
                    cq0 += _P_DENSE[s, 0] * ks
                    cq1 += _P_DENSE[s, 1] * ks
                    cq2 += _P_DENSE[s, 2] * ks
                    cq3 += _P_DENSE[s, 3] * ks
                cq0 *= h
                cq1 *= h
                cq2 *= h
                cq3 *= h
                prev_e = x - event_level
                prev_s = x - section_value
                uprev = 0.0
                for j in range(1, 9):
                    u = j / 8.0
                    if j == 8:
                        cx = xn
                    else:
                        cx = x + u * (cq0 + u * (cq1 + u * (cq2 + u * cq3)))
                    cur_e = cx - event_level
                    cur_s = cx - section_value
                    if prev_e < 0.0 and cur_e >= 0.0:
                        uc = _refine_crossing(K, x, y, z, h, 0, event_level, uprev, u)
                        tev = t + uc * h
                        if first_event_t < 0.0:
                            first_event_t = tev
                        else:
                            last_event_t = tev
                        n_events += 1
                    if prev_s < 0.0 and cur_s >= 0.0:
                        uc = _refine_crossing(K, x, y, z, h, 0, section_value, uprev, u)
                        rx, ry, rz = _dense3(K, x, y, z, h, uc)
                        if ring_n < 64:
                            ring[ring_n] = rz
                            ring_n += 1
                        else:
                            for m in range(63):
                                ring[m] = ring[m + 1]
                            ring[63] = rz
                    prev_e = cur_e
                    prev_s = cur_s
                    uprev = u
                if early_exit and n_events >= 2:
                    break
            # local maxima of x strictly below the event level; the
            # history must be maintained through the transient too
            if (
                t >= transient
                and have2 == 2
                and xm1 > xm2
                and xm1 >= xn
                and xm1 < event_level
            ):
                n_small_max += 1
            xm2 = xm1
            xm1 = xn
            if have2 < 2:
                have2 += 1
            t = t + h
            x, y, z = xn, yn, zn
            K[0, 0], K[0, 1], K[0, 2] = K[6, 0], K[6, 1], K[6, 2]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))

    # recurrence detection on the stored return-z values
    period = 0
    if ring_n >= 18:
        navail = ring_n
        ncheck = 16
        for q in range(1, 9):
            if navail < ncheck + q:
                continue
            ok = True
            for i in range(ncheck):
                za = ring[navail - 1 - i]
                zb = ring[navail - 1 - i - q]
                if abs(za - zb) > 1e-4:
                    ok = False
                    break
            if ok:
                period = q
                break

    mean_gap = 0.0
    if n_events >= 2 and last_event_t > first_event_t:
        mean_gap = (last_event_t - first_event_t) / (n_events - 1)
    return max_x, n_events, n_small_max, period, diverged, mean_gap, STATUS_OK


@njit(cache=True)
def _step12(t, Y, h, K, P, Yn, E):
    """DOPRI5 stage sweep for the 12-dim variational system.

    Y = (x, y, z, m11..m33 row-major). K is (7, 12) with K[0] prefilled.
    Writes the proposal into Yn and the embedded error into E.
    """
    tmp = np.empty(12)
    for stage in range(1, 6):
        for c in range(12):
            acc = 0.0
            for s in range(stage):
                acc += _A_LOW[stage, s] * K[s, c]
            tmp[c] = Y[c] + h * acc
        _var_rhs(t + _C_NODES[stage] * h, tmp, P, K[stage])
    for c in range(12):
        Yn[c] = Y[c] + h * (
            _B1 * K[0, c] + _B3 * K[2, c] + _B4 * K[3, c] + _B5 * K[4, c] + _B6 * K[5, c]
        )
    _var_rhs(t + h, Yn, P, K[6])
    for c in range(12):
        E[c] = h * (
            _E1 * K[0, c]
            + _E3 * K[2, c]
            + _E4 * K[3, c]
            + _E5 * K[4, c]
            + _E6 * K[5, c]
            + _E7 * K[6, c]
        )


@njit(cache=True, inline="always")
def _var_rhs(t, Y, P, out):
    """Derivative of (state, fundamental matrix), written into out."""
    x, y, z = Y[0], Y[1], Y[2]
    dx, dy, dz = _rhs(t, x, y, z, P)
    out[0], out[1], out[2] = dx, dy, dz
    j11, j12, j13, j21, j22, j23, j31, j32, j33 = _jac_rows(t, x, y, z, P)
    for col in range(3):
        m1 = Y[3 + col]
        m2 = Y[6 + col]
        m3 = Y[9 + col]
        out[3 + col] = j11 * m1 + j12 * m2 + j13 * m3
        out[6 + col] = j21 * m1 + j22 * m2 + j23 * m3
        out[9 + col] = j31 * m1 + j32 * m2 + j33 * m3


@njit(cache=True, inline="always")
def _err_norm12(E, Y0, Y1, rtol, atol):
    acc = 0.0
    for c in range(12):
        sc = atol + rtol * max(abs(Y0[c]), abs(Y1[c]))
        acc += (E[c] / sc) ** 2
    return np.sqrt(acc / 12.0)


@njit(cache=True)
def var_final_k(x0, y0, z0, T, P, rtol, atol, max_step):
    """State and fundamental matrix at exactly t = T (M(0) = I)."""
    Y = np.empty(12)
    Y[0], Y[1], Y[2] = x0, y0, z0
    for i in range(9):
        Y[3 + i] = 0.0
    Y[3] = 1.0
    Y[7] = 1.0
    Y[11] = 1.0
    K = np.empty((7, 12))
    Yn = np.empty(12)
    E = np.empty(12)
    _var_rhs(0.0, Y, P, K[0])
    t = 0.0
    d0 = np.sqrt((Y[0] ** 2 + Y[1] ** 2 + Y[2] ** 2) / 3.0)
    d1 = np.sqrt((K[0, 0] ** 2 + K[0, 1] ** 2 + K[0, 2] ** 2) / 3.0)
    h = 1e-6 if d1 < 1e-10 else min(0.01 * (d0 + 1.0) / (d1 + 1e-16), max_step, T)
    facold = 1e-4
    while t < T:
        if h > T - t:
            h = T - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return Y, STATUS_UNDERFLOW
        _step12(t, Y, h, K, P, Yn, E)
        finite = True
        for c in range(12):
            if not np.isfinite(Yn[c]):
                finite = False
                break
        if not finite:
            return Y, STATUS_NONFINITE
        err = _err_norm12(E, Y, Yn, rtol, atol)
        if err <= 1.0:
            t += h
            for c in range(12):
                Y[c] = Yn[c]
                K[0, c] = K[6, c]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    return Y, STATUS_OK


@njit(cache=True)
def var_to_crossing_k(
    x0, y0, z0, kth, coord, value, direction, t_max, P, rtol, atol, max_step
):
    """Variational flow to the k-th same-direction section crossing.

    Returns (Y, t_cross, hits, status): Y holds (state, M) refined at the
    crossing time via the 12-dim dense output. hits < kth with STATUS_OK
    means the trajectory never completed its returns before t_max.
    """
    Y = np.empty(12)
    Y[0], Y[1], Y[2] = x0, y0, z0
    for i in range(9):
        Y[3 + i] = 0.0
    Y[3] = 1.0
    Y[7] = 1.0
    Y[11] = 1.0
    K = np.empty((7, 12))
    Yn = np.empty(12)
    E = np.empty(12)
    Yc = np.empty(12)
    _var_rhs(0.0, Y, P, K[0])
    t = 0.0
    d1 = np.sqrt((K[0, 0] ** 2 + K[0, 1] ** 2 + K[0, 2] ** 2) / 3.0)
    h = 1e-6 if d1 < 1e-10 else min(0.01 / (d1 + 1e-16), max_step, t_max)
    facold = 1e-4
    hits = 0
    # leave the section before counting crossings: skip an initial
    # crossing within a residual distance of the start
    t_free = 1e-9
    while t < t_max:
        if h > t_max - t:
            h = t_max - t
        if h < 16.0 * _EPS * max(abs(t), 1.0):
            return Y, t, hits, STATUS_UNDERFLOW
        _step12(t, Y, h, K, P, Yn, E)
        finite = True
        for c in range(12):
            if not np.isfinite(Yn[c]):
                finite = False
                break
        if not finite:
            return Y, t, hits, STATUS_NONFINITE
        err = _err_norm12(E, Y, Yn, rtol, atol)
        if err <= 1.0:
            prev = Y[coord] - value
            uprev = 0.0
            for j in range(1, 9):
                u = j / 8.0
                _dense12(K, Y, h, u, Yc)
                cur = Yc[coord] - value
                # strict sign change so an on-section launch is not a return
                up = prev < 0.0 and cur >= 0.0
                dn = prev > 0.0 and cur <= 0.0
                if up or dn:
                    sign = 1 if up else -1
                    if direction == 0 or sign == direction:
                        ua, ub = uprev, u
                        ca = prev
                        for _ in range(200):
                            um = 0.5 * (ua + ub)
                            _dense12(K, Y, h, um, Yc)
                            cm = Yc[coord] - value
                            if abs(cm) < 1e-10 and (ub - ua) * h < 1e-9:
                                break
                            if (ca <= 0.0) == (cm <= 0.0):
                                ua = um
                                ca = cm
                            else:
                                ub = um
                        tc = t + 0.5 * (ua + ub) * h
                        # a start sitting exactly on the section is not a
                        # return; count crossings strictly after launch
                        if tc > t_free:
                            hits += 1
                            if hits == kth:
                                return Yc, tc, hits, STATUS_OK
                prev = cur
                uprev = u
            t = t + h
            for c in range(12):
                Y[c] = Yn[c]
                K[0, c] = K[6, c]
            facold = max(err, 1e-4)
            fac = err ** _EXPO / facold ** _BETA if err > 0.0 else 0.1
            h = h * min(10.0, max(0.2, _SAFETY / fac))
            if h > max_step:
                h = max_step
        else:
            fac = err ** _EXPO / facold ** _BETA
            h = h * max(0.2, min(1.0, _SAFETY / fac))
    return Y, t, hits, STATUS_OK


@njit(cache=True, inline="always")
def _dense12(K, Y0, h, u, out):
    u2 = u * u
    u3 = u2 * u
    u4 = u3 * u
    for c in range(12):
        acc = Y0[c]
        for s in range(7):
            q = (
                _P_DENSE[s, 0] * u
                + _P_DENSE[s, 1] * u2
                + _P_DENSE[s, 2] * u3
                + _P_DENSE[s, 3] * u4
            )
            acc += h * q * K[s, c]
        out[c] = acc
    return out


@njit(cache=True, inline="always")
def _sigma_max(Y):
    """Largest singular value of the 3x3 matrix stored in Y[3:12]."""
    # scale to avoid overflow when stretching is extreme
    mx = 0.0
    for i in range(9):
        if abs(Y[3 + i]) > mx:
            mx = abs(Y[3 + i])
    if mx == 0.0:
        return 0.0
    m = np.empty((3, 3))
    for r in range(3):
        for c in range(3):
            m[r, c] = Y[3 + 3 * r + c] / mx
    b = m.T @ m
    # largest eigenvalue of the symmetric matrix b, trigonometric form
    tr = b[0, 0] + b[1, 1] + b[2, 2]
    q = tr / 3.0
    p2 = 0.0
    for r in range(3):
        for c in range(3):
            d = b[r, c] - (q if r == c else 0.0)
            p2 += d * d
    p = np.sqrt(p2 / 6.0)
    if p < 1e-300:
        lam = q
    else:
        invp = 1.0 / p
        # det((b - qI)/p) / 2
        b00 = (b[0, 0] - q) * invp
        b11 = (b[1, 1] - q) * invp
        b22 = (b[2, 2] - q) * invp
        b01 = b[0, 1] * invp
        b02 = b[0, 2] * invp
        b12 = b[1, 2] * invp
        detr = (
            b00 * (b11 * b22 - b12 * b12)
            - b01 * (b01 * b22 - b12 * b02)
            + b02 * (b01 * b12 - b11 * b02)
        ) / 2.0
        if detr > 1.0:
            detr = 1.0
        if detr < -1.0:
            detr = -1.0
        phi = np.arccos(detr) / 3.0
        lam = q + 2.0 * p * np.cos(phi)
    if lam < 0.0:
        lam = 0.0
    return mx * np.sqrt(lam)


@njit(cache=True)
def ftle_grid_k(ys, zs, x_plane, T, P, rtol, atol, max_step):
    """log10 of the largest stretching factor over [0, T] per grid cell."""
    ny = ys.shape[0]
    nz = zs.shape[0]
    out = np.empty((ny, nz))
    for i in range(ny):
        for j in range(nz):
            Y, status = var_final_k(x_plane, ys[i], zs[j], T, P, rtol, atol, max_step)
            if status != STATUS_OK:
                out[i, j] = np.nan
            else:
                s = _sigma_max(Y)
                out[i, j] = np.log10(s) if s > 0.0 else -np.inf
    return out


@njit(cache=True)
def basin_evidence_grid_k(
    ys,
    zs,
    x_plane,
    transient,
    window,
    P,
    rtol,
    atol,
    max_step,
    event_level,
    section_value,
):
    """Per-cell classification evidence over a section-plane grid.

    Output layout per cell: (max_x, n_events, n_small_max, period,
    diverged, status) packed into a float array.
    """
    ny = ys.shape[0]
    nz = zs.shape[0]
    out = np.empty((ny, nz, 6))
    for i in range(ny):
        for j in range(nz):
            max_x, n_events, n_small, period, diverged, _gap, status = evidence_k(
                x_plane,
                ys[i],
                zs[j],
                transient,
                window,
                P,
                rtol,
                atol,
                max_step,
                event_level,
                section_value,
                True,
            )
            out[i, j, 0] = max_x
            out[i, j, 1] = float(n_events)
            out[i, j, 2] = float(n_small)
            out[i, j, 3] = float(period)
            out[i, j, 4] = 1.0 if diverged else 0.0
            out[i, j, 5] = float(status)
    return out


@njit(cache=True)
def em_observable_k(x0, y0, z0, t0, t1, dt, every, dxp, dyp, dzp, sx, sy, sz, seed, P):
    """Euler-Maruyama path, projecting onto a direction every `every` steps.

    Additive Gaussian noise with per-component scales (sx, sy, sz), fixed
    step dt. Returns (g_samples, status, final_state). The first sample is
    the projection of the initial state.
    """
    np.random.seed(seed)
    nsteps = int(np.ceil((t1 - t0) / dt - 1e-12))
    nsamp = nsteps // every + 1
    g = np.empty(nsamp)
    g[0] = dxp * x0 + dyp * y0 + dzp * z0
    x, y, z = x0, y0, z0
    t = t0
    isamp = 1
    noisy = sx > 0.0 or sy > 0.0 or sz > 0.0
    for i in range(1, nsteps + 1):
        step = dt if t + dt <= t1 else t1 - t
        dx, dy, dz = _rhs(t, x, y, z, P)
        x += step * dx
        y += step * dy
        z += step * dz
        if noisy:
            r = np.sqrt(step)
            x += sx * r * np.random.standard_normal()
            y += sy * r * np.random.standard_normal()
            z += sz * r * np.random.standard_normal()
        t += step
        if not (np.isfinite(x) and np.isfinite(y) and np.isfinite(z)):
            return g[:isamp], STATUS_NONFINITE, x, y, z
        if i % every == 0 and isamp < nsamp:
            g[isamp] = dxp * x + dyp * y + dzp * z
            isamp += 1
    return g[:isamp], STATUS_OK, x, y, z


# ---------------------------------------------------------------------------
# python-side helpers


def pack_params(p: ModelParams, forcing: Forcing | None = None) -> np.ndarray:
    """Build the 8-vector parameter pack the kernels consume."""
    if forcing is None:
        a0, amp, omega = p.a, 0.0, OMEGA_CAL
    else:
        a0, amp, omega = forcing.a0, forcing.amplitude, forcing.omega
    return np.array(
        [p.delta, p.rho, p.c, p.k, a0, amp, omega, raw_per_year(p)], dtype=float
    )


def raise_for_status(status: int, context: str) -> None:
    if status == STATUS_OK:
        return
    if status == STATUS_NONFINITE:
        raise NonFiniteState(f"{context}: state became non-finite")
    if status == STATUS_UNDERFLOW:
        raise StepSizeUnderflow(f"{context}: step size underflow")
    if status == STATUS_FULL:
        raise MemoryError(f"{context}: crossing buffer full")
    raise RuntimeError(f"{context}: unknown kernel status {status}")
