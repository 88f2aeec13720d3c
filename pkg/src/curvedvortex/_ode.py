"""Compiled Dormand-Prince 5(4) integrator for the radial shooting problems.

Integration proceeds node to node on the radial grid so that tabulated
coefficients are cubic-Hermite interpolated on a known interval.  Kinds:

    0  u-equation   u'' = -u'/r + N^2 (c-1)^2 u / r^2 + lam/2 (u^2-1) u e^eta
    1  v-equation   v'' =  v'/r + c^2 (v-1) e^eta  [+ eta' v' if el]
    2  u-tail       q' = lam e^eta - q^2 - q/r          (q = w'/w, w = 1-u)
    3  v-tail       q' = c^2 e^eta - q^2 + q/r [+ eta' q] (q = z'/z, z = 1-v)

``c`` is the tabulated partner profile.  The metric is either the power
law g0 r^-delta or a tabulated ln e^eta with its derivative.
"""
import math

import numpy as np
from numba import njit

# status codes
REACHED_END = 0
TURNED_DOWN = 1  # f' < 0 while 0 < f < 1
CROSSED_ONE = 2  # f >= 1 with f' >= 0 so far
STEP_FAILURE = -1

# par layout
P_N, P_LAM, P_LNG0, P_DELTA, P_EL, P_TAB = range(6)

_C2, _C3, _C4, _C5 = 1.0 / 5, 3.0 / 10, 4.0 / 5, 8.0 / 9
_A21 = 1.0 / 5
_A31, _A32 = 3.0 / 40, 9.0 / 40
_A41, _A42, _A43 = 44.0 / 45, -56.0 / 15, 32.0 / 9
_A51, _A52, _A53, _A54 = 19372.0 / 6561, -25360.0 / 2187, 64448.0 / 6561, -212.0 / 729
_A61, _A62, _A63, _A64, _A65 = 9017.0 / 3168, -355.0 / 33, 46732.0 / 5247, 49.0 / 176, -5103.0 / 18656
_B1, _B3, _B4, _B5, _B6 = 35.0 / 384, 500.0 / 1113, 125.0 / 192, -2187.0 / 6784, 11.0 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (71.0 / 57600, -71.0 / 16695, 71.0 / 1920,
                                -17253.0 / 339200, 22.0 / 525, -1.0 / 40)


@njit(cache=True)
def _hermite(r, k, rn, val, der):
    """Value and derivative of the cubic Hermite interpolant on [rn[k], rn[k+1]]."""
    r0 = rn[k]
    H = rn[k + 1] - r0
    t = (r - r0) / H
    t2 = t * t
    t3 = t2 * t
    h00 = 2 * t3 - 3 * t2 + 1
    h10 = t3 - 2 * t2 + t
    h01 = -2 * t3 + 3 * t2
    h11 = t3 - t2
    f = h00 * val[k] + H * h10 * der[k] + h01 * val[k + 1] + H * h11 * der[k + 1]
    d00 = (6 * t2 - 6 * t) / H
    d10 = 3 * t2 - 4 * t + 1
    d01 = (-6 * t2 + 6 * t) / H
    d11 = 3 * t2 - 2 * t
    df = d00 * val[k] + d10 * der[k] + d01 * val[k + 1] + d11 * der[k + 1]
    return f, df


@njit(cache=True)
def _metric(r, k, rn, eta, deta, par):
    """(e^eta, eta') at r."""
    if par[P_TAB] > 0.5:
        e, de = _hermite(r, k, rn, eta, deta)
        return math.exp(e), de
    return math.exp(par[P_LNG0] - par[P_DELTA] * math.log(r)), -par[P_DELTA] / r


@njit(cache=True)
def _rhs(kind, r, y0, y1, k, rn, cval, cder, eta, deta, par):
    em, de = _metric(r, k, rn, eta, deta, par)
    c, _ = _hermite(r, k, rn, cval, cder)
    N = par[P_N]
    if kind == 0:
        acc = -y1 / r + N * N * (c - 1.0) ** 2 * y0 / (r * r) + 0.5 * par[P_LAM] * (y0 * y0 - 1.0) * y0 * em
        return y1, acc
    if kind == 1:
        acc = y1 / r + c * c * (y0 - 1.0) * em
        if par[P_EL] > 0.5:
            acc += de * y1
        return y1, acc
    if kind == 2:
        return par[P_LAM] * em - y0 * y0 - y0 / r, 0.0
    q = c * c * em - y0 * y0 + y0 / r
    if par[P_EL] > 0.5:
        q += de * y0
    return q, 0.0


@njit(cache=True)
def _dense(theta, h, ya, yb, fa, fb):
    """Cubic Hermite on a step: value at fraction theta."""
    t = theta
    t2 = t * t
    t3 = t2 * t
    return ((2 * t3 - 3 * t2 + 1) * ya + (t3 - 2 * t2 + t) * h * fa
            + (-2 * t3 + 3 * t2) * yb + (t3 - t2) * h * fb)


@njit(cache=True)
def _locate(level, h, ya, yb, fa, fb):
    """Fraction theta in [0, 1] where the step's Hermite interpolant crosses ``level``."""
    lo, hi = 0.0, 1.0
    sa = _dense(0.0, h, ya, yb, fa, fb) - level
    for _ in range(60):
        mid = 0.5 * (lo + hi)
        sm = _dense(mid, h, ya, yb, fa, fb) - level
        if (sm >= 0.0) == (sa >= 0.0):
            lo = mid
            sa = sm
        else:
            hi = mid
    return 0.5 * (lo + hi)


@njit(cache=True)
def integrate(kind, y_init0, y_init1, k_start, k_end, rn, cval, cder, eta, deta, par,
              rtol, classify, traj):
    """Integrate from node k_start to node k_end (either direction).

    Writes node states into ``traj`` (shape (n, 2)); entries past an exit stay
    untouched.  Returns (status, exit_r, y0, y1, n_steps).
    """
    atol = 1e-300
    direction = 1 if k_end >= k_start else -1
    y0 = y_init0
    y1 = y_init1
    traj[k_start, 0] = y0
    traj[k_start, 1] = y1
    k = k_start
    r = rn[k_start]
    h = 0.0
    steps = 0
    while k != k_end:
        kn = k + direction
        seg = k if direction > 0 else kn  # Hermite interval index
        r_target = rn[kn]
        span = r_target - r
        if h == 0.0 or abs(h) > abs(span):
            h = span if h == 0.0 else math.copysign(min(abs(h), abs(span)), span)
            if steps == 0:
                h = 0.25 * span
        while True:
            if abs(r_target - r) <= 1e-15 * abs(r_target):
                break
            if abs(h) > abs(r_target - r):
                h = r_target - r
            f0, f1 = _rhs(kind, r, y0, y1, seg, rn, cval, cder, eta, deta, par)
            a0, a1 = _rhs(kind, r + _C2 * h, y0 + h * _A21 * f0, y1 + h * _A21 * f1, seg, rn, cval, cder, eta, deta, par)
            b0, b1 = _rhs(kind, r + _C3 * h, y0 + h * (_A31 * f0 + _A32 * a0),
                          y1 + h * (_A31 * f1 + _A32 * a1), seg, rn, cval, cder, eta, deta, par)
            c0, c1 = _rhs(kind, r + _C4 * h, y0 + h * (_A41 * f0 + _A42 * a0 + _A43 * b0),
                          y1 + h * (_A41 * f1 + _A42 * a1 + _A43 * b1), seg, rn, cval, cder, eta, deta, par)
            d0, d1 = _rhs(kind, r + _C5 * h,
                          y0 + h * (_A51 * f0 + _A52 * a0 + _A53 * b0 + _A54 * c0),
                          y1 + h * (_A51 * f1 + _A52 * a1 + _A53 * b1 + _A54 * c1),
                          seg, rn, cval, cder, eta, deta, par)
            e0, e1 = _rhs(kind, r + h,
                          y0 + h * (_A61 * f0 + _A62 * a0 + _A63 * b0 + _A64 * c0 + _A65 * d0),
                          y1 + h * (_A61 * f1 + _A62 * a1 + _A63 * b1 + _A64 * c1 + _A65 * d1),
                          seg, rn, cval, cder, eta, deta, par)
            n0 = y0 + h * (_B1 * f0 + _B3 * b0 + _B4 * c0 + _B5 * d0 + _B6 * e0)
            n1 = y1 + h * (_B1 * f1 + _B3 * b1 + _B4 * c1 + _B5 * d1 + _B6 * e1)
            g0, g1 = _rhs(kind, r + h, n0, n1, seg, rn, cval, cder, eta, deta, par)
            err0 = h * (_E1 * f0 + _E3 * b0 + _E4 * c0 + _E5 * d0 + _E6 * e0 + _E7 * g0)
            err1 = h * (_E1 * f1 + _E3 * b1 + _E4 * c1 + _E5 * d1 + _E6 * e1 + _E7 * g1)
            s0 = atol + rtol * max(abs(y0), abs(n0))
            s1 = atol + rtol * max(abs(y1), abs(n1))
            if kind >= 2:
                err = abs(err0) / s0
            else:
                err = math.sqrt(0.5 * ((err0 / s0) ** 2 + (err1 / s1) ** 2))
            steps += 1
            if not (math.isfinite(n0) and math.isfinite(n1) and math.isfinite(err)):
                h *= 0.25
                if abs(h) < 1e-14 * abs(r) or steps > 2000000:
                    return STEP_FAILURE, r, y0, y1, steps
                continue
            if err <= 1.0:
                if classify:
                    if n0 >= 1.0:
                        th = _locate(1.0, h, y0, n0, y1, n1)
                        return CROSSED_ONE, r + th * h, 1.0, _dense(th, h, y1, n1, f1, g1), steps
                    if n1 < 0.0:
                        th = _locate(0.0, h, y1, n1, f1, g1)
                        return TURNED_DOWN, r + th * h, _dense(th, h, y0, n0, y1, n1), 0.0, steps
                r = r + h
                y0 = n0
                y1 = n1
                fac = 5.0 if err == 0.0 else min(5.0, max(0.2, 0.9 * err ** -0.2))
                h *= fac
            else:
                h *= max(0.2, 0.9 * err ** -0.2)
                if abs(h) < 1e-14 * abs(r) or steps > 2000000:
                    return STEP_FAILURE, r, y0, y1, steps
        r = r_target
        k = kn
        traj[k, 0] = y0
        traj[k, 1] = y1
    return REACHED_END, r, y0, y1, steps


def run(kind, y_init, k_start, k_end, rn, cval, cder, eta, deta, par, rtol=1e-10, classify=True):
    traj = np.full((rn.size, 2), np.nan)
    status, r, y0, y1, steps = integrate(kind, float(y_init[0]), float(y_init[1]), int(k_start), int(k_end),
                                         rn, cval, cder, eta, deta, par, float(rtol), classify, traj)
    return int(status), float(r), (float(y0), float(y1)), traj, int(steps)
