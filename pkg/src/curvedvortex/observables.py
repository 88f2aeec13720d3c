"""Gauge fields and integrated observables of planar and radial solutions.

Sign convention: the upper-sign self-dual system
    F12 = -1/2 e^eta (|phi|^2 - 1),   D1 phi + i D2 phi = 0,
so F12 >= 0 and the flux is +2 pi N.  With phi = exp(u/2 + i Theta),
Theta = sum_s arg(x - p_s), the potential is

    A1 = 1/2 d_y u + d_x Theta,   A2 = -1/2 d_x u + d_y Theta.

The 1/|x - p_s| parts of d u0 and d Theta cancel, leaving

    A1 = 1/2 d_y v - sum (y - p_y)/(1 + d^2),   A2 = -1/2 d_x v + sum (x - p_x)/(1 + d^2),

which is smooth, so no branch of arg is ever differentiated.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate
from scipy.interpolate import RegularGridInterpolator
from scipy.stats import linregress

from .errors import BranchCutArtifact, NonMonotoneTail
from .fitting import DecayFit, decay_fit
from .multigrid import laplacian5
from .planar import PlanarSolution, solve_planar
from .radial import RadialSolution

DPHI_TOL = 1e-4
ANNULUS = (0.5, 0.9)
SLOPE_WINDOW = (0.6, 0.9)
_N_RAYS = 16
_N_RAY_SAMPLES = 40


# ---------------------------------------------------------------------------
# finite differences


def _d(f, h, axis):
    """Fourth-order centred first derivative; second order in the outer two nodes."""
    out = np.gradient(f, h, axis=axis, edge_order=2)
    s = [slice(None)] * f.ndim

    def sl(a, b):
        t = list(s)
        t[axis] = slice(a, b)
        return tuple(t)

    n = f.shape[axis]
    inner = (f[sl(0, n - 4)] - 8 * f[sl(1, n - 3)] + 8 * f[sl(3, n - 1)] - f[sl(4, n)]) / (12 * h)
    out[sl(2, n - 2)] = inner
    return out


def _trapz2(f, h):
    w = np.ones(f.shape[0])
    w[0] = w[-1] = 0.5
    return float(h * h * (w @ f @ w))


def _fill_nonfinite(f):
    f = f.copy()
    bad = ~np.isfinite(f)
    if bad.any():
        p = np.pad(np.where(bad, 0.0, f), 1)
        c = np.pad((~bad).astype(float), 1)
        s = p[2:, 1:-1] + p[:-2, 1:-1] + p[1:-1, 2:] + p[1:-1, :-2]
        k = c[2:, 1:-1] + c[:-2, 1:-1] + c[1:-1, 2:] + c[1:-1, :-2]
        f[bad] = s[bad] / np.maximum(k[bad], 1)
    return f


# ---------------------------------------------------------------------------
# fields


@dataclass
class GaugeFields:
    phi_re: np.ndarray
    phi_im: np.ndarray
    A1: np.ndarray
    A2: np.ndarray
    F12: np.ndarray  # centred curl of A
    J12: np.ndarray  # d1 J2 - d2 J1
    dphi2: np.ndarray  # |D1 phi|^2 + |D2 phi|^2 from covariant differences
    dphi2_reduced: np.ndarray  # 1/2 e^u |grad u|^2
    J12_identity: np.ndarray  # i(D1phi conj(D2phi) - c.c.) - |phi|^2 F12
    grid: object = field(repr=False)
    dphi_mismatch: float = 0.0

    @property
    def phi_abs2(self):
        return self.phi_re ** 2 + self.phi_im ** 2


def _far_mask(grid, points, radius, band=2):
    X, Y = grid.mesh()
    keep = np.ones(X.shape, dtype=bool)
    keep[:band] = keep[-band:] = False
    keep[:, :band] = keep[:, -band:] = False
    for px, py in points:
        keep &= np.hypot(X - px, Y - py) > radius
    return keep


def reconstruct_fields(u, points, grid, v=None, check=True, exclude_radius=0.5) -> GaugeFields:
    """phi, A, F12 and J12 from u = ln|phi|^2.

    ``v`` is the smooth remainder u - u0; if omitted it is recovered from u
    (vortex nodes filled from their neighbours).  Raises BranchCutArtifact
    when the covariant and reduced forms of |D phi|^2 disagree by more than
    1e-4 away from the vortices.
    """
    X, Y = grid.mesh()
    h = grid.h
    points = tuple((float(p[0]), float(p[1])) for p in points)
    theta = np.zeros_like(X)
    Ax = np.zeros_like(X)
    Ay = np.zeros_like(X)
    u0 = np.zeros_like(X)
    for px, py in points:
        dx, dy = X - px, Y - py
        d2 = dx * dx + dy * dy
        theta += np.arctan2(dy, dx)
        Ax -= dy / (1 + d2)
        Ay += dx / (1 + d2)
        with np.errstate(divide="ignore"):
            u0 += np.log(d2 / (1 + d2))
    if v is None:
        with np.errstate(invalid="ignore"):
            v = _fill_nonfinite(np.where(np.isfinite(u0), u - u0, np.nan))
    u = u0 + v  # -inf exactly on vortex nodes
    vx, vy = _d(v, h, 0), _d(v, h, 1)
    A1 = 0.5 * vy + Ax
    A2 = -0.5 * vx + Ay
    modulus = np.exp(0.5 * u)
    phi = modulus * np.exp(1j * theta)

    F12 = _d(A2, h, 0) - _d(A1, h, 1)
    D1 = _d(phi.real, h, 0) + 1j * _d(phi.imag, h, 0) - 1j * A1 * phi
    D2 = _d(phi.real, h, 1) + 1j * _d(phi.imag, h, 1) - 1j * A2 * phi
    dphi2 = np.abs(D1) ** 2 + np.abs(D2) ** 2

    # 1/2 e^u |grad u|^2 = 2 |grad |phi||^2 with the singular part of grad u0 analytic
    gx, gy = vx.copy(), vy.copy()
    for px, py in points:
        dx, dy = X - px, Y - py
        d2 = dx * dx + dy * dy
        with np.errstate(divide="ignore", invalid="ignore"):
            gx += 2 * dx / d2 - 2 * dx / (1 + d2)
            gy += 2 * dy / d2 - 2 * dy / (1 + d2)
    with np.errstate(invalid="ignore"):
        reduced = _fill_nonfinite(0.5 * np.exp(u) * (gx * gx + gy * gy))

    # J_k = Im(conj(phi) D_k phi) = 1/2 e^u (-d_y u, d_x u)
    expu = np.exp(u)
    J1 = -0.5 * _fill_nonfinite(expu * gy)
    J2 = 0.5 * _fill_nonfinite(expu * gx)
    J12 = _d(J2, h, 0) - _d(J1, h, 1)
    J12_id = -2.0 * np.imag(D1 * np.conj(D2)) - expu * F12

    far = _far_mask(grid, points, exclude_radius)
    mismatch = float(np.abs(dphi2 - reduced)[far].max()) if far.any() else 0.0
    out = GaugeFields(phi.real, phi.imag, A1, A2, F12, J12, dphi2, reduced, J12_id, grid, mismatch)
    if check and mismatch > DPHI_TOL:
        raise BranchCutArtifact(
            f"|D phi|^2 differs from 1/2 e^u |grad u|^2 by {mismatch:.3e} away from the vortices"
        )
    return out


def fields_of(sol: PlanarSolution, check=True) -> GaugeFields:
    return reconstruct_fields(sol.u_analytic(), sol.background.points, sol.grid, v=sol.v, check=check)


def winding_number(fields: GaugeFields, radius, center=(0.0, 0.0), samples=2048):
    """Phase winding of phi around a circle, from interpolated phi."""
    g = fields.grid
    t = np.linspace(0, 2 * np.pi, samples, endpoint=False)
    pts = np.c_[center[0] + radius * np.cos(t), center[1] + radius * np.sin(t)]
    re = RegularGridInterpolator((g.x, g.x), fields.phi_re)(pts)
    im = RegularGridInterpolator((g.x, g.x), fields.phi_im)(pts)
    ph = np.unwrap(np.arctan2(im, re))
    ph = np.append(ph, ph[0] + 2 * np.pi * round((ph[-1] - ph[0]) / (2 * np.pi)))
    return int(round((ph[-1] - ph[0]) / (2 * np.pi)))


def boundary_circulation(fields: GaugeFields):
    """Counter-clockwise loop integral of A along the boundary of the box."""
    g = fields.grid
    h = g.h
    w = np.ones(g.n)
    w[0] = w[-1] = 0.5
    bottom = h * (w @ fields.A1[:, 0])
    top = h * (w @ fields.A1[:, -1])
    right = h * (w @ fields.A2[-1, :])
    left = h * (w @ fields.A2[0, :])
    return float(bottom + right - top - left)


# ---------------------------------------------------------------------------
# integrals


def magnetic_flux(sol, fields=None):
    """Planar: 1/2 int e^eta (1 - e^u).  Radial: 2 pi N (v(r_max) - v(r_min))."""
    if isinstance(sol, RadialSolution):
        return 2 * math.pi * sol.params.N * float(sol.v.values[-1] - sol.v.values[0])
    expu = np.exp(sol.u_analytic())
    return 0.5 * _trapz2(sol.metric.values * (1 - expu), sol.h)


def flux_from_curl(sol, fields=None):
    fields = fields or fields_of(sol, check=False)
    return _trapz2(fields.F12, sol.h)


def energy_density(sol):
    """H e^eta at lambda = 1 from the reduced form 1/4 e^eta (e^u-1)^2 + 1/4 e^u |grad u|^2."""
    expu = np.exp(sol.u_analytic())
    f = fields_of(sol, check=False)
    return 0.25 * sol.metric.values * (expu - 1) ** 2 + 0.5 * f.dphi2_reduced


def total_energy(sol, fields=None, form="reduced"):
    """int H e^eta.

    Planar (lambda = 1): ``form="reduced"`` uses the bounded reduced density,
    ``form="defining"`` uses 1/2 e^-eta F12^2 + 1/2 |D phi|^2 + 1/8 e^eta (|phi|^2-1)^2
    with F12 and |D phi|^2 from the reconstructed fields.  Radial: the
    one-dimensional integral of the radial energy density.
    """
    if isinstance(sol, RadialSolution):
        return radial_energy(sol)
    fields = fields or fields_of(sol, check=False)
    em = sol.metric.values
    expu = np.exp(sol.u_analytic())
    lam = sol.params.lam
    if form == "reduced":
        dens = 0.25 * em * (expu - 1) ** 2 + 0.5 * fields.dphi2_reduced
    elif form == "defining":
        dens = (0.5 * fields.F12 ** 2 / em + 0.5 * _fill_nonfinite(fields.dphi2)
                + lam / 8 * (expu - 1) ** 2 * em)
    else:
        raise ValueError(f"unknown energy form {form!r}")
    return _trapz2(dens, sol.h)


def radial_energy_density(sol: RadialSolution):
    """Integrand of E = int e(r) 2 pi r dr."""
    r = sol.r
    p = sol.params
    u, du = sol.u.values, sol.u.derivs
    v, dv = sol.v.values, sol.v.derivs
    em = np.exp(sol.metric.eta)
    N2 = p.N ** 2
    return 0.5 * (du * du + N2 * (dv / r) ** 2 / em + N2 * u * u * (v - 1) ** 2 / (r * r)
                  + 0.25 * p.lam * (u * u - 1) ** 2 * em)


def radial_energy(sol: RadialSolution):
    r = sol.r
    f = radial_energy_density(sol) * 2 * math.pi * r
    # the core r < r_min carries e ~ const: add its disc area
    core = radial_energy_density(sol)[0] * math.pi * r[0] ** 2
    return float(integrate.simpson(f, x=r) + core)


def _fit_log_slope(sol, window=SLOPE_WINDOW, n_rays=_N_RAYS, samples=_N_RAY_SAMPLES):
    """Least-squares slope of eta against ln r on rays through the vortex centroid."""
    R = sol.grid.R
    cx, cy = np.mean(sol.background.points, axis=0) if sol.background.points else (0.0, 0.0)
    rr = np.linspace(window[0] * R, window[1] * R, samples)
    itp = RegularGridInterpolator((sol.grid.x, sol.grid.x), sol.metric.eta, method="cubic")
    eta = np.zeros_like(rr)
    for t in np.linspace(0, 2 * np.pi, n_rays, endpoint=False):
        pts = np.c_[cx + rr * np.cos(t), cy + rr * np.sin(t)]
        pts = np.clip(pts, -R, R)
        eta += itp(pts)
    eta /= n_rays
    res = linregress(np.log(rr), eta)
    return float(res.slope), float(res.stderr)


def metric_slope(sol):
    """Log-log slope of e^eta on the annulus [0.6R, 0.9R]; -8 pi G N asymptotically."""
    return _fit_log_slope(sol)[0]


def total_curvature(sol, with_error=False):
    """int K e^eta = -1/2 int Lap eta.

    Planar: trapezoidal quadrature over interior nodes plus a tail term
    pi (s_fit - s_edge), where s_fit is the fitted log-log decay rate of e^eta
    on [0.6R, 0.9R] and s_edge the rate at the outer end of the window; the
    two agree once e^eta has reached its conical form, so the correction and
    its error bar measure how far from that the box still is.  Radial:
    -pi [r eta'] between the ends of the grid.
    """
    if isinstance(sol, RadialSolution):
        r, de = sol.r, sol.metric.deta
        val = float(-math.pi * (r[-1] * de[-1] - r[0] * de[0]))
        return (val, 0.0) if with_error else val
    if sol.params.G == 0:
        return (0.0, 0.0) if with_error else 0.0
    K = -0.5 * laplacian5(sol.metric.eta, sol.h)
    box = float(sol.h ** 2 * K[1:-1, 1:-1].sum())
    s_fit, s_err = _fit_log_slope(sol)
    s_edge, _ = _fit_log_slope(sol, window=(0.85, 0.9), samples=8)
    tail = math.pi * (s_edge - s_fit)
    val = box + tail
    err = abs(tail) + math.pi * s_err
    return (val, err) if with_error else val


def current_flux(sol, fields=None):
    """int J12 by direct quadrature, next to the value E - Phi.

    Returns dict(direct, energy_minus_flux, half_identity_residual).  On a
    self-dual solution H e^eta = 1/2 (F12 + J12), so int J12 = 2E - Phi,
    which vanishes because J is a total curl of a decaying current.
    """
    fields = fields or fields_of(sol, check=False)
    direct = _trapz2(fields.J12, sol.h)
    E = total_energy(sol, fields)
    flux = magnetic_flux(sol)
    return {"direct": direct, "energy_minus_flux": E - flux,
            "half_identity_residual": E - 0.5 * (flux + direct)}


# ---------------------------------------------------------------------------
# decay


def ray_average(sol, f, window=ANNULUS, n_rays=_N_RAYS, samples=_N_RAY_SAMPLES):
    """Angle average of |f| on circles about the vortex centroid."""
    R = sol.grid.R
    cx, cy = np.mean(sol.background.points, axis=0) if sol.background.points else (0.0, 0.0)
    rr = np.linspace(window[0] * R, window[1] * R, samples)
    itp = RegularGridInterpolator((sol.grid.x, sol.grid.x), np.abs(f), method="cubic")
    acc = np.zeros_like(rr)
    for t in np.linspace(0, 2 * np.pi, n_rays, endpoint=False):
        pts = np.clip(np.c_[cx + rr * np.cos(t), cy + rr * np.sin(t)], -R, R)
        acc += itp(pts)
    return rr, acc / n_rays


def decay_exponents(sol, fields=None, window=ANNULUS):
    """Power-law fits of 1 - |phi|^2, |D phi| and F12 on the same annulus.

    The annulus spans less than a decade, so the span requirement of
    :func:`decay_fit` is relaxed here.
    """
    fields = fields or fields_of(sol, check=False)
    out = {}
    expu = np.exp(sol.u_analytic())
    for key, f in (("b_u", 1 - expu), ("b_grad", np.sqrt(_fill_nonfinite(fields.dphi2))),
                   ("b_F12", fields.F12)):
        rr, avg = ray_average(sol, f, window)
        try:
            out[key] = decay_fit(rr, avg, check_span=False)
        except NonMonotoneTail as exc:
            out[key] = exc
    return out


def radial_decay(sol: RadialSolution):
    from .radial import verify_radial_properties
    rep = verify_radial_properties(sol)
    return {"alpha": rep.alpha, "beta": rep.beta}


# ---------------------------------------------------------------------------
# report


@dataclass
class ObservableReport:
    flux: float
    energy: float
    total_curvature: float
    deficit_angle: float
    current_flux: float
    decay: dict
    errors: dict
    extras: dict = field(default_factory=dict)

    CSV_KEYS = ("flux", "energy", "total_curvature", "deficit_angle", "current_flux")

    def as_dict(self):
        dec = {}
        for k, f in self.decay.items():
            if isinstance(f, DecayFit):
                dec[k] = f.as_dict()
            elif f is None:
                dec[k] = None
            else:
                dec[k] = {"error": str(f)}
        return {"flux": self.flux, "energy": self.energy, "total_curvature": self.total_curvature,
                "deficit_angle": self.deficit_angle, "current_flux": self.current_flux,
                "decay": dec, "errors": dict(self.errors), "extras": dict(self.extras)}

    def csv_header(self):
        dec = [f"{k}" for k in sorted(self.decay)]
        return ",".join(list(self.CSV_KEYS) + dec + [f"err_{k}" for k in self.CSV_KEYS])

    def csv_row(self):
        vals = [getattr(self, k) for k in self.CSV_KEYS]
        for k in sorted(self.decay):
            f = self.decay[k]
            vals.append(f.exponent if isinstance(f, DecayFit) else float("nan"))
        vals += [self.errors.get(k, float("nan")) for k in self.CSV_KEYS]
        return ",".join("%.17g" % (v if v is not None else float("nan")) for v in vals)


def _planar_values(sol):
    f = fields_of(sol, check=False)
    cf = current_flux(sol, f)
    curv, curv_err = total_curvature(sol, with_error=True)
    return {
        "flux": magnetic_flux(sol),
        "energy": total_energy(sol, f),
        "total_curvature": curv,
        "current_flux": cf["direct"],
        "_curv_err": curv_err,
        "_fields": f,
        "_cf": cf,
    }


def observable_report(sol, coarse=None, richardson=True) -> ObservableReport:
    """All observables of a solution with error estimates.

    Planar errors come from a Richardson comparison with a solve on the grid
    with half the resolution (``coarse``, computed if not given), assuming
    second-order convergence.  Radial entries are exact identities or 1-D
    quadratures; their error column holds the collocation residual scale.
    """
    p = sol.params
    if isinstance(sol, RadialSolution):
        flux = magnetic_flux(sol)
        dec = radial_decay(sol)
        return ObservableReport(
            flux=flux, energy=radial_energy(sol), total_curvature=total_curvature(sol),
            deficit_angle=p.deficit_angle, current_flux=float("nan"), decay=dec,
            errors={"flux": 2 * math.pi * p.N * abs(1 - sol.v.values[-1]) if sol.v.values[-1] < 1 else 0.0,
                    "energy": max(sol.residual_u, sol.residual_v),
                    "total_curvature": 0.0, "deficit_angle": 0.0, "current_flux": float("nan")},
            extras={"a_star": sol.a_star, "b_star": sol.b_star,
                    "flux_target": 2 * math.pi * p.N},
        )
    fine = _planar_values(sol)
    errors = {"deficit_angle": 0.0}
    if richardson:
        if coarse is None:
            coarse = solve_planar(p, R=sol.grid.R, n=(sol.grid.n - 1) // 2 + 1)
        cv = _planar_values(coarse)
        for k in ("flux", "energy", "total_curvature", "current_flux"):
            errors[k] = abs(fine[k] - cv[k]) / 3.0
        errors["total_curvature"] += fine["_curv_err"]
    dec = decay_exponents(sol, fine["_fields"])
    cf = fine["_cf"]
    extras = {
        "flux_from_curl": flux_from_curl(sol, fine["_fields"]),
        "boundary_circulation": boundary_circulation(fine["_fields"]),
        "energy_defining_form": total_energy(sol, fine["_fields"], form="defining"),
        "energy_minus_flux": cf["energy_minus_flux"],
        "half_identity_residual": cf["half_identity_residual"],
        "metric_slope": metric_slope(sol),
        "dphi_mismatch": fine["_fields"].dphi_mismatch,
        "flux_target": 2 * math.pi * p.N,
        "energy_target": math.pi * p.N,
        "curvature_target": 8 * math.pi ** 2 * p.G * p.N,
    }
    return ObservableReport(fine["flux"], fine["energy"], fine["total_curvature"], p.deficit_angle,
                            fine["current_flux"], dec, errors, extras)
