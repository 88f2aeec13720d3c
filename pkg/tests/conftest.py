"""Shared, session-cached solves (the expensive part of the suite)."""
import functools
import math
import time

import numpy as np
import pytest

from curvedvortex import observables, planar, radial
from curvedvortex.params import PhysicalParams, make_radial_grid

# well separated placements used for the planar targets
PLACEMENTS = {
    1: ((0.0, 0.0),),
    2: ((2.0, 0.0), (-2.0, 0.0)),
    3: ((-2.0, -1.0), (2.0, -1.0), (0.0, 2.0)),
}

DELTAS = (0.0, 0.25, 0.5)
LAMBDAS = (0.5, 1.0, 2.0)


def curved_params(N, delta, lam=1.0, points=None):
    points = PLACEMENTS[N] if points is None else points
    G = delta / (8 * math.pi * N) if delta else 0.0
    return PhysicalParams(lam=lam, G=G, g0=1.0, points=tuple(points))


@functools.lru_cache(maxsize=None)
def planar_solution(N, delta, n=513, coincident=False):
    pts = ((0.0, 0.0),) * N if coincident else None
    p = curved_params(N, delta, points=pts)
    t = time.perf_counter()
    sol = planar.solve_planar(p, R=20.0, n=n)
    sol.wall_time = time.perf_counter() - t
    return sol


@functools.lru_cache(maxsize=None)
def planar_fields(N, delta):
    return observables.fields_of(planar_solution(N, delta), check=False)


@functools.lru_cache(maxsize=None)
def radial_solution(delta, lam, N=2, metric_mode="power", v_equation="standard"):
    p = curved_params(N, delta, lam=lam, points=((0.0, 0.0),) * N)
    t = time.perf_counter()
    sol = radial.fixed_point_T(p, metric_mode=metric_mode, v_equation=v_equation)
    sol.wall_time = time.perf_counter() - t
    return sol


@functools.lru_cache(maxsize=None)
def radial_grid():
    return make_radial_grid()


@pytest.fixture(scope="session")
def planar_case():
    return planar_solution


@pytest.fixture(scope="session")
def radial_case():
    return radial_solution


# acceptance lines, printed at the end of the run
ACCEPTANCE = {}


def record(criterion, ok, detail):
    prev = ACCEPTANCE.get(criterion)
    ok = bool(ok) and (prev is None or prev[0])
    detail = detail if prev is None else prev[1] + "; " + detail
    ACCEPTANCE[criterion] = (ok, detail)
    return ok


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
