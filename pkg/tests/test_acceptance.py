"""Acceptance targets.  Each test records a PASS/FAIL line that is printed in
the terminal summary (section "acceptance criteria")."""
import math

import numpy as np
import pytest
from scipy.interpolate import RegularGridInterpolator

from conftest import DELTAS, LAMBDAS, planar_fields, radial_grid, record
from curvedvortex import observables, planar, radial
from curvedvortex.params import PhysicalParams

TWO_PI = 2 * math.pi


@pytest.mark.parametrize("N", [1, 2, 3])
def test_c01_planar_flux(planar_case, N):
    sol = planar_case(N, 0.0)
    flux = observables.magnetic_flux(sol)
    rel = abs(flux / (TWO_PI * N) - 1)
    ok = record(1, rel < 0.01 and sol.wall_time < 120,
                f"N={N} flux/2piN-1={rel:.2e} ({sol.wall_time:.1f}s)")
    assert ok


@pytest.mark.parametrize("delta", DELTAS)
@pytest.mark.parametrize("lam", LAMBDAS)
def test_c02_radial_flux(radial_case, delta, lam):
    sol = radial_case(delta, lam)
    N = sol.params.N
    flux = TWO_PI * N * (sol.v.values[-1] - sol.v.values[0])
    err = abs(flux - TWO_PI * N)
    bound = 2 * radial.TAIL_TOL * TWO_PI * N
    ok = record(2, err <= bound and sol.wall_time < 60,
                f"d={delta} l={lam} err={err:.1e} ({sol.wall_time:.1f}s)")
    assert ok


@pytest.mark.parametrize("N", [1, 2, 3])
def test_c03_energy(planar_case, N):
    e0 = observables.total_energy(planar_case(N, 0.0))
    e1 = observables.total_energy(planar_case(N, 0.25))
    target = math.pi * N
    r0, r1 = abs(e0 / target - 1), abs(e1 / target - 1)
    ok = record(3, r0 < 0.02 and r1 < 0.02 and abs(e1 / e0 - 1) < 0.02,
                f"N={N} E/piN-1: G=0 {r0:.1e}, G>0 {r1:.1e}")
    assert ok


@pytest.mark.parametrize("N", [1, 2])
@pytest.mark.parametrize("delta", [0.25, 0.5])
def test_c04_total_curvature(planar_case, N, delta):
    sol = planar_case(N, delta)
    val, err = observables.total_curvature(sol, with_error=True)
    target = 8 * math.pi ** 2 * sol.params.G * N
    rel = abs(val / target - 1)
    ok = record(4, rel < 0.05, f"N={N} 8piGN={delta} rel={rel:.1e} (+-{err:.1e})")
    assert ok


@pytest.mark.parametrize("N, delta", [(1, 0.0), (1, 0.25), (2, 0.25), (3, 0.25),
                                      (1, 0.5), (2, 0.5)])
def test_c05_metric_slope(planar_case, N, delta):
    slope = observables.metric_slope(planar_case(N, delta))
    tol = 0.05 * (delta + 0.1)
    ok = record(5, abs(slope + delta) <= tol, f"N={N} 8piGN={delta} slope={slope:.5f}")
    assert ok


@pytest.mark.parametrize("key", [(1, 0.0), (2, 0.0), (3, 0.0), (1, 0.25), (2, 0.25),
                                 (3, 0.25), (1, 0.5), (2, 0.5)])
def test_c06_monotone_iteration(planar_case, key):
    sol = planar_case(*key)
    rise = max(sol.max_increase)
    umax = float(sol.u.max())
    ok = record(6, rise <= 1e-12 and umax <= 0.0 and max(sol.max_u) <= 0.0,
                f"{key}: max rise {rise:.1e}, max u {umax:.1e}")
    assert ok


def test_c07_shooting_trichotomy():
    p = PhysicalParams(lam=1.0, G=0.5 / (16 * math.pi), g0=1.0, points=((0, 0), (0, 0)))
    g = radial_grid()
    v = radial.default_v_init(g)
    lo, hi = radial.integrate_u(1e-2, v, p), radial.integrate_u(10.0, v, p)
    a, prof = radial.shoot_u(v, p)
    info = prof.info
    ok = record(7, lo.cls == "A1" and hi.cls == "A2" and info.width < 1e-12
                and info.bisections < 60,
                f"a=1e-2 {lo.cls}, a=10 {hi.cls}, a*={a:.10f}, "
                f"{info.bisections} bisections to {info.width:.1e}")
    assert ok


@pytest.mark.parametrize("delta", DELTAS)
@pytest.mark.parametrize("lam", LAMBDAS)
def test_c08_radial_properties(radial_case, delta, lam):
    sol = radial_case(delta, lam)
    rep = radial.verify_radial_properties(sol)
    direct = all(rep.status(k) == "pass" for k in ("(i)", "(ii)", "(iii)"))
    a, b = rep.alpha, rep.beta
    window = a.ci[1] > 1 and b.ci[1] > 0 and a.ci[0] < 2 + 2 * b.ci[1] - delta
    ok = record(8, direct and window and rep.status("(iv)") != "fail",
                f"d={delta} l={lam} alpha={a.exponent:.2f} beta={b.exponent:.2f}")
    assert ok, rep.summary()


@pytest.mark.parametrize("v_equation", [radial.STANDARD, radial.EULER_LAGRANGE])
def test_c09_cross_solver(planar_case, radial_case, v_equation):
    sol = planar_case(2, 0.25, coincident=True)
    rad = radial_case(0.25, 1.0, metric_mode="self-consistent", v_equation=v_equation)
    phi = np.exp(0.5 * sol.u_analytic())
    itp = RegularGridInterpolator((sol.grid.x, sol.grid.x), phi, method="cubic")
    rr = np.linspace(0.5, 8.0, 200)
    urad = rad.u(rr)
    err = 0.0
    for th in np.linspace(0, TWO_PI, 8, endpoint=False):
        pts = np.c_[rr * np.cos(th), rr * np.sin(th)]
        err = max(err, float(np.abs(itp(pts) - urad).max()))
    ok = record(9, err < 5e-2, f"{v_equation} v-equation sup|phi| error {err:.1e}")
    assert ok


def test_c10_residual_order(planar_case, radial_case):
    coarse = planar.truncation_residual(planar_case(1, 0.0, n=257))
    fine = planar.truncation_residual(planar_case(1, 0.0))
    ratio = coarse / fine
    worst = max(max(radial_case(d, l).residual_u, radial_case(d, l).residual_v)
                for d in DELTAS for l in LAMBDAS)
    ok = record(10, ratio >= 2.8 and worst < 1e-6,
                f"257->513 residual ratio {ratio:.2f}, radial collocation max {worst:.1e}")
    assert ok


def test_c11_decay_hierarchy(planar_case):
    sol = planar_case(2, 0.5)
    dec = observables.decay_exponents(sol, planar_fields(2, 0.5))
    gap = dec["b_F12"].exponent - dec["b_u"].exponent
    ok = record(11, abs(gap - 0.5) <= 0.15,
                f"b_F12-b_u = {dec['b_F12'].exponent:.3f}-{dec['b_u'].exponent:.3f} = {gap:.3f}")
    assert ok
