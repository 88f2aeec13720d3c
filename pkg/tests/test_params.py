import math

import pytest
from hypothesis import given, strategies as st

from curvedvortex.errors import GridError, InadmissibleParams, VortexTooCloseToBoundary
from curvedvortex.params import (PhysicalParams, check_config, make_grid, make_radial_grid,
                                 params_from_config, require_valid, solver_options, validate)


def test_boundary_case_passes():
    p = PhysicalParams(G=1 / (8 * math.pi), lam=1.0, points=((0, 0), (1, 1)))
    rep = validate(p)
    assert rep.passed
    assert rep.delta == pytest.approx(2.0, rel=1e-15)


def test_flat_three_vortices():
    rep = validate(PhysicalParams(G=0.0, points=((0, 0),) * 3))
    assert rep.passed and rep.delta == 0 and rep.deficit_angle == 0


def test_violation_reported():
    rep = validate(PhysicalParams(G=1 / (2 * math.pi), points=((0, 0),)))
    assert not rep.passed
    assert [c.name for c in rep.failures] == ["4*pi*G*N<=1"]
    with pytest.raises(InadmissibleParams, match="4\\*pi\\*G\\*N"):
        require_valid(PhysicalParams(G=1 / (2 * math.pi), points=((0, 0),)))


@pytest.mark.parametrize("kw", [dict(lam=0.0), dict(lam=-1.0), dict(g0=0.0), dict(G=-1e-3)])
def test_sign_constraints(kw):
    assert not validate(PhysicalParams(points=((0, 0),), **kw)).passed


def test_notes_for_radial_hypothesis():
    notes = validate(PhysicalParams(points=((0, 0),))).notes
    assert any("N<=1" in n for n in notes)
    assert any("flat-space" in n for n in notes)


@given(G=st.floats(0, 0.2, allow_nan=False), N=st.integers(0, 6),
       lam=st.floats(1e-3, 10), g0=st.floats(1e-3, 10))
def test_validate_pure_and_admissibility(G, N, lam, g0):
    p = PhysicalParams(lam=lam, G=G, g0=g0, points=((0.0, 0.0),) * N)
    a, b = validate(p), validate(p)
    assert a == b
    assert a.passed == (4 * math.pi * G * N <= 1 + 1e-12)
    if a.passed:
        assert 0 <= a.delta <= 2 + 1e-11
    assert a.deficit_angle == pytest.approx(math.pi * a.delta)


def test_grid_examples():
    g = make_grid(20.0, 257, [(0, 0)])
    assert g.h == 40 / 256
    assert g.x[128] == 0.0
    with pytest.raises(VortexTooCloseToBoundary):
        make_grid(20.0, 257, [(15, 0)])
    with pytest.raises(GridError):
        make_grid(10.0, 2)
    with pytest.raises(GridError):
        make_grid(10.0, 64)


def test_radial_grid():
    g = make_radial_grid()
    assert g.r_min == 1e-3 and g.r_max == pytest.approx(1e3)
    ratios = g.nodes[1:] / g.nodes[:-1]
    assert ratios.max() <= 1.02 + 1e-12
    with pytest.raises(GridError):
        make_radial_grid(1.0, 10.0)


def test_config_helpers():
    cfg = {"lambda": 2, "G": 0.01, "g0": 1.5, "points": [[0, 0], [1, 0]], "grid": {"R": 20, "n": 257}}
    check_config(cfg)
    p = params_from_config(cfg)
    assert p.N == 2 and p.lam == 2.0 and p.points[1] == (1.0, 0.0)
    assert solver_options({"solver": {"tol": 1e-6}})["tol"] == 1e-6
    with pytest.raises(KeyError):
        check_config({"lambda": 1})
