"""Self-dual planar vortices on the curved plane.

Solves  Lap u = e^eta (e^u - 1) + 4 pi sum_s delta_{p_s}  on [-R, R]^2 with
u = 0 on the boundary and the lagged metric e^eta(u).

Discretisation.  The 5-point Laplacian with a discrete point mass delta_h
(bilinear weights onto the four surrounding nodes).  A discrete background
U0 solves  Lap_h U0 = 4 pi delta_h - g  with U0 = u0 on the boundary, so
U0 carries exactly the lattice log-singularity and v = u - U0 is smooth on
the grid scale.  Then u = 0 (v = -U0) is an exact discrete supersolution
and the monotone scheme below never has to fight stencil error near a
vortex.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import InadmissibleParams, MonotonicityViolation, NoConvergence
from .metric import MetricField, log_metric, metric_from_decomposition, vortex_sums
from .multigrid import laplacian5, linear_poisson_solve
from .params import Grid2D, PhysicalParams, require_valid

MONOTONE_SLACK = 1e-12
KAPPA_FACTOR = 1.05
# linear solves are run to the rounding floor so that solver error cannot
# register as a monotonicity violation
_INNER_RTOL = 1e-14
# lattice constant 2*gamma + 3 ln 2 of the 5-point potential kernel; only
# used to pick a sensible finite start value for U0 on a vortex node
_LATTICE_LOG = 2.0 * 0.5772156649015329 + 3.0 * math.log(2.0)


@dataclass(frozen=True)
class BackgroundPair:
    """Analytic background u0, g and the discrete background used by the solver."""

    grid: Grid2D
    points: tuple
    u0: np.ndarray  # sum ln(d^2/(1+d^2)), -inf on vortex nodes
    g: np.ndarray  # sum 4/(1+d^2)^2
    rho: np.ndarray  # -sum ln(1+d^2)
    U0: np.ndarray  # discrete background, finite everywhere
    source: np.ndarray  # 4 pi delta_h - Lap_h U0 (equals g to solver precision)
    point_mass: np.ndarray  # 4 pi delta_h, mass 4 pi N

    @property
    def N(self):
        return len(self.points)

    @property
    def expu0(self):
        """prod_s d^2/(1+d^2); exactly 0 on vortex nodes."""
        X, Y = self.grid.mesh()
        out = np.ones_like(X)
        for px, py in self.points:
            d2 = (X - px) ** 2 + (Y - py) ** 2
            out *= d2 / (1.0 + d2)
        return out

    def patch_mask(self, halfwidth=1):
        """True on the (2k+1)x(2k+1) node patches around every vortex."""
        return _patch_mask(self.grid, self.points, halfwidth)


def _patch_mask(grid, points, halfwidth=1):
    mask = np.zeros((grid.n, grid.n), dtype=bool)
    h = grid.h
    for px, py in points:
        i = int(round((px + grid.R) / h))
        j = int(round((py + grid.R) / h))
        mask[max(i - halfwidth, 0):i + halfwidth + 1, max(j - halfwidth, 0):j + halfwidth + 1] = True
    return mask


def discrete_point_mass(points, grid):
    """4 pi delta_h: bilinear split of each unit source onto its cell corners."""
    n, h, R = grid.n, grid.h, grid.R
    m = np.zeros((n, n))
    for px, py in points:
        fx, fy = (px + R) / h, (py + R) / h
        i0, j0 = min(int(math.floor(fx)), n - 2), min(int(math.floor(fy)), n - 2)
        tx, ty = fx - i0, fy - j0
        for di, wx in ((0, 1.0 - tx), (1, tx)):
            for dj, wy in ((0, 1.0 - ty), (1, ty)):
                m[i0 + di, j0 + dj] += 4.0 * math.pi * wx * wy / (h * h)
    return m


def build_background(points, grid: Grid2D) -> BackgroundPair:
    points = tuple((float(p[0]), float(p[1])) for p in points)
    X, Y = grid.mesh()
    h = grid.h
    u0, rho = vortex_sums(X, Y, points)
    g = np.zeros_like(X)
    logd2 = np.zeros_like(X)
    floor = h * h * math.exp(-_LATTICE_LOG)
    for px, py in points:
        d2 = (X - px) ** 2 + (Y - py) ** 2
        g += 4.0 / (1.0 + d2) ** 2
        logd2 += np.log(np.maximum(d2, floor))
    mass = discrete_point_mass(points, grid)

    # U0 = start + c with c = 0 on the boundary and Lap_h U0 = 4 pi delta_h - g
    start = logd2 + rho
    if points:
        corr = linear_poisson_solve(mass - g - laplacian5(start, h), 0.0, h, rtol=_INNER_RTOL)
        U0 = start + corr
    else:
        U0 = start
    source = mass - laplacian5(U0, h)
    return BackgroundPair(grid, points, u0, g, rho, U0, source, mass)


def supersolution(bg: BackgroundPair) -> np.ndarray:
    """v+ = -U0, i.e. u = 0: the discrete form of the vacuum supersolution."""
    return -bg.U0


@dataclass
class PlanarSolution:
    grid: Grid2D
    params: PhysicalParams
    background: BackgroundPair
    v: np.ndarray
    metric: MetricField
    residual_history: list  # sup-norm change of v per outer pass
    outer_iters: int
    inner_iters: list  # inner iterations per outer pass
    max_increase: list  # per inner iteration, max_x (v_{k+1} - v_k)
    max_u: list  # per inner iteration, max_x u_k
    residual: float  # discrete certificate
    converged: bool = True
    omega_final: float = 1.0
    ordering_violation: float | None = None
    wall_time: float = 0.0
    notes: list = field(default_factory=list)

    @property
    def u(self):
        """Discrete u = U0 + v (finite on vortex nodes)."""
        return self.background.U0 + self.v

    @property
    def expu(self):
        return np.exp(self.u)

    @property
    def eta(self):
        return self.metric.eta

    @property
    def h(self):
        return self.grid.h

    def u_analytic(self):
        """u0 + v with the analytic background (-inf on vortex nodes)."""
        return self.background.u0 + self.v


def _rhs_terms(v, bg, eta):
    expu = np.exp(bg.U0 + v)
    em = np.exp(eta)
    return em * (expu - 1.0) + bg.source, em * expu


def discrete_residual(sol: PlanarSolution, exclude_patches=True) -> float:
    """sup |Lap_h v - F(v)| over interior nodes (3x3 vortex patches skipped)."""
    bg = sol.background
    F, _ = _rhs_terms(sol.v, bg, sol.metric.eta)
    r = np.abs(laplacian5(sol.v, sol.h) - F)
    r[0, :] = r[-1, :] = r[:, 0] = r[:, -1] = 0.0
    if exclude_patches:
        r[bg.patch_mask(1)] = 0.0
    return float(r.max())


def certificate_bound(sol: PlanarSolution, tol: float) -> float:
    return 10.0 * tol * (1.0 + float(sol.metric.values.max()))


def laplacian4(f, h):
    """Fourth-order 9-point-cross Laplacian; NaN within two nodes of the boundary."""
    out = np.full(f.shape, np.nan)
    c = f[2:-2, 2:-2]
    d2x = -f[4:, 2:-2] + 16 * f[3:-1, 2:-2] - 30 * c + 16 * f[1:-3, 2:-2] - f[:-4, 2:-2]
    d2y = -f[2:-2, 4:] + 16 * f[2:-2, 3:-1] - 30 * c + 16 * f[2:-2, 1:-3] - f[2:-2, :-4]
    out[2:-2, 2:-2] = (d2x + d2y) / (12.0 * h * h)
    return out


def truncation_residual(sol: PlanarSolution, exclude_radius=1.0) -> float:
    """Continuous-PDE residual of the discrete solution.

    Applies a fourth-order Laplacian to u and compares with e^eta (e^u - 1).
    Nodes within ``exclude_radius`` of a vortex and a two-node boundary band
    are skipped.  For a second-order scheme this scales like h^2.
    """
    u = sol.u
    lap = laplacian4(u, sol.h)
    r = np.abs(lap - np.exp(sol.metric.eta) * (np.exp(u) - 1.0))
    X, Y = sol.grid.mesh()
    keep = np.isfinite(r)
    for px, py in sol.background.points:
        keep &= np.hypot(X - px, Y - py) > exclude_radius
    return float(r[keep].max())


def monotone_solve(bg: BackgroundPair, params: PhysicalParams, tol=1e-8, max_outer=50,
                   max_inner=500, omega=1.0, kappa_factor=KAPPA_FACTOR, subsolution=None,
                   check=True) -> PlanarSolution:
    """Monotone iteration with a lagged metric.

    Inner step (correction form, w = v_{k+1} - v_k):
        (Lap_h - kappa) w = F(v_k) - Lap_h v_k,   kappa = 1.05 e^{eta + u_k} nodewise,
    with F(v) = e^eta (e^{U0+v} - 1) + g.  Since F is convex in v and
    kappa >= F'(v_k), every iterate stays a supersolution and w <= 0.  The
    metric factor is frozen during an inner loop and refreshed afterwards
    (optionally damped in log space with ``omega``); e^eta is increasing in
    v for u <= 0, so the refresh preserves the supersolution property.
    """
    t0 = time.perf_counter()
    require_valid(params)
    if params.lam != 1.0:
        raise InadmissibleParams(f"the planar solver is self-dual only (lambda = 1), got {params.lam}")
    if tuple(params.points) != tuple(bg.points):
        raise ValueError("background and params describe different vortex sets")
    if not (0 < omega <= 1):
        raise ValueError("omega must lie in (0, 1]")
    h = bg.grid.h
    v = supersolution(bg).copy()
    lap = laplacian5(v, h)
    eta = log_metric(v, bg.rho, np.exp(bg.U0 + v), params)

    history, inner_counts, increases, max_u = [], [], [], []
    ordering = None
    converged = False
    for outer in range(1, max_outer + 1):
        v_start = v.copy()
        inner_ok = False
        for k in range(max_inner):
            F, dF = _rhs_terms(v, bg, eta)
            rhs = F - lap
            w = linear_poisson_solve(rhs, kappa_factor * dF, h, rtol=_INNER_RTOL)
            inc = float(w.max())
            increases.append(inc)
            if check and inc > MONOTONE_SLACK:
                raise MonotonicityViolation(
                    f"inner iterate increased by {inc:.3e} (outer {outer}, inner {k + 1})"
                )
            v += w
            # incremental update keeps the rounding in Lap_h v at the level of |w|
            lap += laplacian5(w, h)
            u = bg.U0 + v
            max_u.append(float(u.max()))
            if subsolution is not None:
                gap = float((np.asarray(subsolution) - u).max())
                ordering = gap if ordering is None else max(ordering, gap)
            if float(np.abs(w).max()) < tol:
                inner_ok = True
                break
        inner_counts.append(k + 1)
        change = float(np.abs(v - v_start).max())
        history.append(change)
        eta_new = log_metric(v, bg.rho, np.exp(bg.U0 + v), params)
        if not inner_ok:
            break
        if change < tol:
            eta = eta_new
            converged = True
            break
        if len(history) >= 3 and history[-1] > history[-2] > history[-3]:
            omega *= 0.5
        eta = (1.0 - omega) * eta + omega * eta_new

    metric = metric_from_decomposition(v, bg.rho, np.exp(bg.U0 + v), params)
    sol = PlanarSolution(
        grid=bg.grid, params=params, background=bg, v=v, metric=metric,
        residual_history=history, outer_iters=len(history), inner_iters=inner_counts,
        max_increase=increases, max_u=max_u, residual=0.0, converged=converged,
        omega_final=omega, ordering_violation=ordering,
    )
    sol.residual = discrete_residual(sol)
    sol.wall_time = time.perf_counter() - t0
    if not converged:
        why = "inner loop hit max_inner" if inner_counts and inner_counts[-1] >= max_inner and history[-1] >= tol else "max_outer reached"
        raise NoConvergence(
            f"planar solve did not converge ({why}); last outer change {history[-1]:.3e}",
            state=sol,
            diagnosis="increase max_outer/max_inner or loosen tol",
        )
    return sol


def solve_planar(params: PhysicalParams, R=20.0, n=513, **kwargs) -> PlanarSolution:
    """Convenience wrapper: grid, background and monotone solve."""
    from .params import make_grid

    grid = make_grid(R, n, params.points)
    return monotone_solve(build_background(params.points, grid), params, **kwargs)
