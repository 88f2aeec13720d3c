"""Quick closed-form checks for every module (seconds, no large solves)."""
from __future__ import annotations

import math
import os
import tempfile

import numpy as np

from . import metric, observables, params, planar, radial
from .errors import (BracketNotFound, GridError, InadmissibleParams, NonMonotoneTail,
                     VortexTooCloseToBoundary)
from .fitting import decay_fit


def _raises(exc, fn, *a, **k):
    try:
        fn(*a, **k)
    except exc:
        return True
    return False


def check_params():
    P = params.PhysicalParams
    yield "flat N=1 admissible", params.validate(P(points=((0, 0),))).passed, ""
    bad = P(G=1.0 / (4 * math.pi) * 1.01, points=((0, 0),))
    rep = params.validate(bad)
    yield "4 pi G N > 1 rejected", not rep.passed and "4*pi*G*N" in rep.summary(), ""
    edge = P(G=1.0 / (8 * math.pi), points=((0, 0), (1, 0)))
    yield "4 pi G N = 1 admitted", params.validate(edge).passed, f"delta = {edge.delta}"
    yield "even n rejected", _raises(GridError, params.make_grid, 10.0, 64), ""
    yield "vortex outside margin rejected", _raises(VortexTooCloseToBoundary, params.make_grid,
                                                    10.0, 65, [(6.0, 0.0)]), ""
    g = params.make_grid(10.0, 65)
    yield "origin on grid", bool(np.any(g.x == 0.0)), f"h = {g.h}"


def check_metric():
    p = params.PhysicalParams(g0=2.5, points=((0, 0),))
    u = -np.random.default_rng(0).random((17, 17))
    m = metric.metric_factor(u, p, params.Grid2D(4.0, 17))
    yield "G=0 metric equals g0", bool(np.all(m.values == 2.5)), ""
    K = metric.gauss_curvature(np.full((9, 9), 0.7), 0.1)
    yield "curvature of constant eta is 0", bool(np.all(K == 0.0)), ""
    pp = params.PhysicalParams(G=0.25 / (8 * math.pi), points=((0, 0),))
    r = np.array([1.0, 10.0])
    val = metric.radial_metric_profile(r, pp)
    yield "power-law radial metric", bool(np.allclose(val, r ** -0.25, rtol=1e-14, atol=0)), ""


def check_planar():
    g = params.make_grid(8.0, 33)
    p = params.PhysicalParams()
    sol = planar.monotone_solve(planar.build_background((), g), p)
    yield "vacuum solve gives u = 0", bool(np.all(sol.u == 0.0)), f"outer {sol.outer_iters}"
    bg = planar.build_background(((0.0, 0.0),), g)
    yield "u = 0 is a supersolution", bool(np.all(bg.U0 + planar.supersolution(bg) == 0.0)), ""
    yield "lambda != 1 rejected", _raises(InadmissibleParams, planar.monotone_solve, bg,
                                          params.PhysicalParams(lam=2.0, points=((0, 0),))), ""


def check_radial():
    grid = params.make_radial_grid(1e-3, 1e3, nodes=400)
    zero = radial.RadialProfile(grid, np.zeros(len(grid)), np.zeros(len(grid)))
    p2 = params.PhysicalParams(lam=1.0, points=((0, 0), (0, 0)))
    u, _ = radial.local_series_u(1.0, 1e-4, zero, p2)
    yield "u / r^N -> a", abs(u / 1e-8 - 1) < 1e-6, f"u/r^2 = {u / 1e-8:.9f}"
    p0 = params.PhysicalParams(lam=0.0, points=((0, 0), (0, 0)))
    u, du = radial.local_series_u(0.3, 1e-3, zero, p0)
    yield "lambda=0, v=0 series is exact", u == 0.3 * 1e-6 and du == 0.3 * 2 * 1e-3, ""
    # lambda = 0 is inadmissible for the solver but the integrator is generic
    out = radial.integrate_u(4.0, zero, p0)
    yield "lambda=0, v=0 crosses 1 at a^(-1/N)", out.cls == "A2" and abs(out.exit_r - 0.5) < 1e-8, \
        f"{out.cls} at {out.exit_r:.10f}"
    yield "lambda=0 has no A1 end", _raises(BracketNotFound, radial.shoot_u, zero, p0), ""
    out = radial.integrate_v(4.0, zero, p2)
    yield "u=0: v = b r^2 crosses 1 at b^(-1/2)", out.cls == "B2" and abs(out.exit_r - 0.5) < 1e-8, \
        f"{out.cls} at {out.exit_r:.10f}"
    yield "u=0 has no B1 end", _raises(BracketNotFound, radial.shoot_v, zero, p2), ""
    r = grid.nodes
    hand = radial.RadialProfile(grid, r / (1 + r), 1 / (1 + r) ** 2)
    vv = radial.default_v_init(grid)
    rep = radial.verify_radial_properties(None, u=hand, v=vv, N=2, delta=0.0)
    yield "u = r/(1+r) fails (iii) for N=2", rep.status("(iii)") == "fail", ""
    rep = radial.verify_radial_properties(None, u=hand, v=vv, N=1, delta=0.0)
    yield "N=1 flags (ii)", rep.status("(ii)") == "flag", ""


def check_observables():
    g = params.make_grid(8.0, 65)
    f = observables.reconstruct_fields(np.zeros((65, 65)), (), g)
    vac = np.all(f.phi_re == 1) and np.all(f.phi_im == 0) and np.all(f.A1 == 0) and np.all(f.F12 == 0)
    yield "vacuum fields", bool(vac), ""
    X, Y = g.mesh()
    d2 = X ** 2 + Y ** 2
    with np.errstate(divide="ignore"):
        u = np.log(d2 / (1 + d2))
    f = observables.reconstruct_fields(u, ((0.0, 0.0),), g, check=False)
    w = observables.winding_number(f, 4.0)
    yield "winding around R/2 is 1", w == 1, f"winding {w}"
    sol = planar.monotone_solve(planar.build_background((), g), params.PhysicalParams())
    yield "N=0 flux and energy vanish", observables.magnetic_flux(sol) == 0 and \
        observables.total_energy(sol) == 0, ""
    yield "G=0 curvature is 0", observables.total_curvature(sol) == 0.0, ""
    rr = np.geomspace(1, 100, 50)
    fit = decay_fit(rr, rr ** -2.0)
    yield "r^-2 fit", abs(fit.exponent - 2) < 0.01 and fit.halfwidth < 0.01, f"{fit.exponent:.6f}"
    rl = np.linspace(1, 100, 100)
    fit = decay_fit(rl, 5 * rl ** -3.0 * (1 + 0.01 * np.sin(rl)), monotone_rtol=0.05)
    yield "perturbed r^-3 fit", fit.ci[0] <= 3 <= fit.ci[1], f"{fit.exponent:.4f} {fit.ci}"
    yield "growing tail rejected", _raises(NonMonotoneTail, decay_fit, rr, rr), ""


def check_cli():
    from .cli import run_sweep

    cfg = {"lambda": 1.0, "G": 0.0, "g0": 1.0, "points": [[0, 0]], "grid": {"R": 8.0, "n": 33}}
    with tempfile.TemporaryDirectory() as d:
        run_sweep(cfg, "G", [], d)
        with open(os.path.join(d, "sweep.csv")) as fh:
            lines = fh.read().splitlines()
    yield "empty sweep writes only the header", len(lines) == 1, lines[0][:40]


SUITES = (check_params, check_metric, check_planar, check_radial, check_observables, check_cli)


def run_selftest():
    results = []
    for suite in SUITES:
        mod = suite.__name__.replace("check_", "")
        try:
            for name, ok, msg in suite():
                results.append((f"{mod}: {name}", bool(ok), msg))
        except Exception as exc:  # a crash fails the suite, the rest still runs
            results.append((f"{mod}: crashed", False, f"{type(exc).__name__}: {exc}"))
    return results
