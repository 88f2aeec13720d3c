"""Conformal metric factor e^eta, Gauss curvature and radial metric profiles.

The planar factor is

    e^eta = g0 * (e^{u - e^u} * prod_s |x - p_s|^{-2})^{4 pi G}.

Splitting u = u0 + v with u0 = sum ln(d^2 / (1 + d^2)) cancels every
singular factor exactly:

    e^eta = g0 * exp(4 pi G (v + rho - e^u)),   rho = -sum ln(1 + d^2),

so all evaluation goes through ``log_metric``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NonFiniteMetric

POWER_LAW = "power"
SELF_CONSISTENT = "self-consistent"
_MODES = (POWER_LAW, SELF_CONSISTENT)


@dataclass(frozen=True)
class MetricField:
    """Sampled e^eta together with eta itself and a provenance tag."""

    values: np.ndarray
    eta: np.ndarray
    source: str = SELF_CONSISTENT

    def min(self):
        return float(self.values.min())


def vortex_sums(X, Y, points):
    """Return (u0, rho) on the mesh; u0 = -inf on vortex nodes."""
    rho = np.zeros_like(X, dtype=float)
    logd2 = np.zeros_like(X, dtype=float)
    with np.errstate(divide="ignore"):
        for px, py in points:
            d2 = (X - px) ** 2 + (Y - py) ** 2
            rho -= np.log1p(d2)
            logd2 += np.log(d2)
    u0 = logd2 + rho
    return u0, rho


def log_metric(v, rho, expu, params):
    """ln e^eta from the regular decomposition (all inputs finite)."""
    return math.log(params.g0) + 4.0 * math.pi * params.G * (v + rho - expu)


def _checked(eta, source):
    with np.errstate(over="ignore", invalid="ignore"):
        vals = np.exp(eta)
    bad = ~np.isfinite(vals) | (vals <= 0)
    if np.any(bad):
        idx = np.argwhere(bad)[0]
        raise NonFiniteMetric(
            f"metric factor is {vals[tuple(idx)]!r} at node {tuple(int(i) for i in idx)}"
        )
    return MetricField(vals, eta, source)


def metric_from_decomposition(v, rho, expu, params) -> MetricField:
    return _checked(log_metric(v, rho, expu, params), SELF_CONSISTENT)


def metric_factor(u, params, grid=None) -> MetricField:
    """Evaluate e^eta from a sampled u = ln|phi|^2.

    With vortices present a ``grid`` is needed.  Nodes within one spacing of
    a vortex use the regular identity with v = u - u0; where u itself is
    singular (u = -inf exactly on the vortex) v is taken from the mean of the
    finite neighbouring values, v being smooth there.
    """
    u = np.asarray(u, dtype=float)
    if params.G == 0.0:
        vals = np.full(u.shape, float(params.g0))
        return MetricField(vals, np.full(u.shape, math.log(params.g0)), SELF_CONSISTENT)
    if not params.points:
        with np.errstate(over="ignore", invalid="ignore"):
            eta = math.log(params.g0) + 4.0 * math.pi * params.G * (u - np.exp(u))
        return _checked(eta, SELF_CONSISTENT)
    if grid is None:
        raise ValueError("a grid is required to evaluate the metric with vortices")
    X, Y = grid.mesh()
    u0, rho = vortex_sums(X, Y, params.points)
    with np.errstate(invalid="ignore"):
        v = u - u0
    bad = ~np.isfinite(v)
    if np.any(bad):
        v = _fill_from_neighbours(v, bad)
    expu = np.exp(u)
    return metric_from_decomposition(v, rho, expu, params)


def _fill_from_neighbours(v, bad):
    v = v.copy()
    n0, n1 = v.shape
    for i, j in np.argwhere(bad):
        vals = [v[a, b] for a, b in ((i + 1, j), (i - 1, j), (i, j + 1), (i, j - 1))
                if 0 <= a < n0 and 0 <= b < n1 and not bad[a, b]]
        v[i, j] = np.mean(vals) if vals else 0.0
    return v


def laplacian(f, h):
    """5-point Laplacian; one-sided second differences on the boundary ring."""
    f = np.asarray(f, dtype=float)
    d2x = np.empty_like(f)
    d2y = np.empty_like(f)
    # difference form so that constants give exactly zero
    d2x[1:-1, :] = (f[2:, :] - f[1:-1, :]) + (f[:-2, :] - f[1:-1, :])
    d2y[:, 1:-1] = (f[:, 2:] - f[:, 1:-1]) + (f[:, :-2] - f[:, 1:-1])
    if f.shape[0] >= 4:
        # 2 f0 - 5 f1 + 4 f2 - f3
        d2x[0, :] = 2 * (f[0] - f[1]) - 3 * (f[1] - f[2]) + (f[2] - f[3])
        d2x[-1, :] = 2 * (f[-1] - f[-2]) - 3 * (f[-2] - f[-3]) + (f[-3] - f[-4])
        d2y[:, 0] = 2 * (f[:, 0] - f[:, 1]) - 3 * (f[:, 1] - f[:, 2]) + (f[:, 2] - f[:, 3])
        d2y[:, -1] = 2 * (f[:, -1] - f[:, -2]) - 3 * (f[:, -2] - f[:, -3]) + (f[:, -3] - f[:, -4])
    else:
        d2x[0, :] = d2x[1, :]
        d2x[-1, :] = d2x[-2, :]
        d2y[:, 0] = d2y[:, 1]
        d2y[:, -1] = d2y[:, -2]
    return (d2x + d2y) / (h * h)


def gauss_curvature(eta, h):
    """K = -1/2 e^{-eta} Lap(eta) nodewise."""
    eta = np.asarray(eta, dtype=float)
    return -0.5 * np.exp(-eta) * laplacian(eta, h)


def radial_metric_profile(r, params, mode=POWER_LAW, u=None):
    """Radial e^eta.

    ``power``: g0 r^{-delta}.  ``self-consistent``: the planar formula with
    |phi| = u(r) and all vortices at the origin,
    g0 exp(4 pi G (2 ln u - u^2 - 2N ln r)); ``u`` must be supplied.
    """
    if mode not in _MODES:
        raise ValueError(f"unknown metric mode {mode!r}")
    r = np.asarray(r, dtype=float)
    if np.any(r <= 0):
        raise ValueError("radial metric needs r > 0")
    if mode == POWER_LAW:
        return params.g0 * r ** (-params.delta)
    if u is None:
        raise ValueError("self-consistent mode needs the radial profile u")
    return np.exp(radial_log_metric(r, np.asarray(u, dtype=float), params))


def radial_log_metric(r, u, params):
    N = params.N
    with np.errstate(divide="ignore"):
        lu = np.log(u)
    return math.log(params.g0) + 4.0 * math.pi * params.G * (2.0 * lu - u * u - 2.0 * N * np.log(r))


def radial_log_metric_slope(r, u, du, params):
    """d(eta)/dr for the self-consistent radial metric."""
    N = params.N
    return 4.0 * math.pi * params.G * (2.0 * du / u - 2.0 * u * du - 2.0 * N / r)
