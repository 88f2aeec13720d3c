import json
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import planar_fields
from curvedvortex import observables as ob
from curvedvortex import planar
from curvedvortex.errors import BranchCutArtifact, NonMonotoneTail
from curvedvortex.fitting import decay_fit
from curvedvortex.params import PhysicalParams, make_grid


@pytest.fixture(scope="module")
def vacuum():
    g = make_grid(8.0, 65)
    return planar.monotone_solve(planar.build_background((), g), PhysicalParams(G=0.01))


def test_vacuum_fields():
    g = make_grid(8.0, 33)
    f = ob.reconstruct_fields(np.zeros((33, 33)), (), g)
    for a in (f.phi_im, f.A1, f.A2, f.F12, f.J12):
        assert np.all(a == 0)
    assert np.all(f.phi_re == 1)


def test_vacuum_observables(vacuum):
    assert ob.magnetic_flux(vacuum) == 0
    assert ob.total_energy(vacuum) == 0
    assert ob.current_flux(vacuum)["direct"] == 0
    # e^eta is constant, so there is no curvature
    assert abs(ob.total_curvature(vacuum)) < 1e-12


def test_winding():
    g = make_grid(8.0, 65)
    r2 = g.radius() ** 2
    with np.errstate(divide="ignore"):
        u = np.log(r2 / (1 + r2))
    f = ob.reconstruct_fields(u, ((0.0, 0.0),), g, check=False)
    assert ob.winding_number(f, 4.0) == 1
    u2 = 2 * u
    f2 = ob.reconstruct_fields(u2, ((0.0, 0.0), (0.0, 0.0)), g, check=False)
    assert ob.winding_number(f2, 4.0) == 2


def test_branch_cut_detected():
    g = make_grid(8.0, 65)
    r2 = g.radius((1.0, 0.0)) ** 2
    with np.errstate(divide="ignore"):
        u = np.log(r2 / (1 + r2))
    # u has its zero at (1, 0) but the phase is wound about the origin
    with pytest.raises(BranchCutArtifact):
        ob.reconstruct_fields(u, ((0.0, 0.0),), g)


def test_converged_fields(planar_case):
    sol = planar_case(1, 0.0)
    f = planar_fields(1, 0.0)
    ua = sol.u_analytic()
    m = np.isfinite(ua)
    assert np.allclose(f.phi_abs2[m], np.exp(ua[m]), rtol=1e-10, atol=0)
    # phi uses the analytic background; it differs from the discrete one by
    # O(h^2) (about 1e-7 at the box edge), so |phi| - 1 can reach a few 1e-8
    assert sol.u.max() <= 0
    assert np.sqrt(f.phi_abs2).max() <= 1 + 1e-7
    assert f.dphi_mismatch < 1e-4
    far = ob._far_mask(sol.grid, sol.background.points, 0.5)
    assert np.abs(f.J12 - f.J12_identity)[far].max() < 1e-4


@pytest.mark.parametrize("key", [(1, 0.0), (2, 0.5), (3, 0.25)])
def test_flux_routes(planar_case, key):
    sol = planar_case(*key)
    f = planar_fields(*key)
    N = sol.params.N
    flux = ob.magnetic_flux(sol)
    assert abs(ob.flux_from_curl(sol, f) / flux - 1) < 1e-3
    assert abs(ob.boundary_circulation(f) / flux - 1) < 0.02
    assert abs(flux / (2 * math.pi * N) - 1) < 0.01


@pytest.mark.parametrize("key", [(1, 0.0), (2, 0.5), (3, 0.25)])
def test_energy_forms(planar_case, key):
    sol = planar_case(*key)
    f = planar_fields(*key)
    e_red = ob.total_energy(sol, f)
    e_def = ob.total_energy(sol, f, form="defining")
    assert abs(e_red / e_def - 1) < 0.01
    assert abs(e_red / (math.pi * sol.params.N) - 1) < 0.02
    with pytest.raises(ValueError):
        ob.total_energy(sol, f, form="other")


def test_curvature_and_deficit(planar_case):
    sol = planar_case(1, 0.25)
    val, err = ob.total_curvature(sol, with_error=True)
    assert abs(val / (0.25 * math.pi) - 1) < 0.05
    assert err >= 0
    assert sol.params.deficit_angle == pytest.approx(8 * math.pi ** 2 * sol.params.G)
    assert ob.total_curvature(planar_case(1, 0.0)) == 0.0


@pytest.mark.parametrize("key", [(1, 0.0), (2, 0.5)])
def test_current_flux(planar_case, key):
    sol = planar_case(*key)
    N = sol.params.N
    cf = ob.current_flux(sol, planar_fields(*key))
    # J is the curl of a decaying current: its flux vanishes, and E - Phi = -pi N
    assert abs(cf["direct"]) < 0.01 * math.pi * N
    assert cf["energy_minus_flux"] == pytest.approx(-math.pi * N, rel=0.01)
    assert abs(cf["half_identity_residual"]) < 1e-3 * math.pi * N


def test_decay_offsets(planar_case):
    dec = ob.decay_exponents(planar_case(1, 0.0), planar_fields(1, 0.0))
    assert dec["b_u"].exponent > 1.5
    sol = planar_case(1, 0.5)
    dec = ob.decay_exponents(sol)
    gap = dec["b_F12"].exponent - dec["b_u"].exponent
    assert abs(gap - sol.params.delta) < 0.15


def test_metric_slope(planar_case):
    assert ob.metric_slope(planar_case(2, 0.5)) == pytest.approx(-0.5, abs=0.03)


def test_report_planar(planar_case):
    sol = planar_case(1, 0.0)
    rep = ob.observable_report(sol, coarse=planar_case(1, 0.0, n=257))
    d = rep.as_dict()
    for k in ("flux", "energy", "total_curvature", "deficit_angle", "current_flux", "decay", "errors"):
        assert k in d
    assert rep.errors["flux"] < 1e-2
    assert abs(rep.flux - 2 * math.pi) <= 0.01 * 2 * math.pi
    json.dumps(d)  # serialisable
    assert len(rep.csv_header().split(",")) == len(rep.csv_row().split(","))
    again = ob.observable_report(sol, coarse=planar_case(1, 0.0, n=257))
    assert again.csv_row() == rep.csv_row()


def test_report_radial(radial_case):
    sol = radial_case(0.0, 1.0)
    rep = ob.observable_report(sol)
    assert rep.flux == pytest.approx(4 * math.pi, rel=1e-6)
    assert rep.energy == pytest.approx(2 * math.pi, rel=1e-4)
    assert rep.decay["alpha"].exponent > 1


def test_radial_curvature(radial_case):
    sol = radial_case(0.25, 1.0, metric_mode="self-consistent", v_equation="euler-lagrange")
    assert ob.total_curvature(sol) == pytest.approx(0.25 * math.pi, rel=1e-3)


# fitting


def test_fit_examples():
    r = np.geomspace(1, 100, 50)
    fit = decay_fit(r, r ** -2.0)
    assert abs(fit.exponent - 2) < 0.01 and fit.halfwidth < 0.01
    rl = np.linspace(1, 100, 100)
    fit = decay_fit(rl, 5 * rl ** -3.0 * (1 + 0.01 * np.sin(rl)), monotone_rtol=0.05)
    assert fit.ci[0] <= 3 <= fit.ci[1]


def test_fit_errors():
    r = np.geomspace(1, 100, 50)
    with pytest.raises(NonMonotoneTail):
        decay_fit(r, r)
    with pytest.raises(NonMonotoneTail):
        decay_fit(r[:10], r[:10] ** -2.0)
    with pytest.raises(NonMonotoneTail):
        decay_fit(np.linspace(1, 5, 40), np.linspace(1, 5, 40) ** -2.0)


@settings(max_examples=30, deadline=None)
@given(b=st.floats(0.1, 12), c=st.floats(1e-3, 1e3))
def test_fit_recovers_power(b, c):
    r = np.geomspace(2, 200, 40)
    fit = decay_fit(r, c * r ** -b)
    assert fit.exponent == pytest.approx(b, abs=1e-8)
