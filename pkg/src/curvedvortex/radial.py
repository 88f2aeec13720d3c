"""Radially symmetric vortices for any lambda > 0 by nested shooting.

For phi = u(r) e^{iN theta}, A_i = N v(r) eps_ij x^j / r^2 the field equations
read

    u'' + u'/r - N^2 (v-1)^2 u / r^2 - lam/2 (u^2-1) u e^eta = 0,
    v'' - v'/r - u^2 (v-1) e^eta = 0,

with u(0) = v(0) = 0 and u, v -> 1.  ``v_equation="euler-lagrange"`` adds
the term -eta' v' that the variation of the radial energy produces when
eta is not constant; the default keeps the form above.

u is found by bisection on a in u ~ a r^N for a frozen v, then v by
bisection on b in v ~ b r^2 for that u, and the map T: v -> v~ is iterated
(optionally damped).  Trajectories near the separatrix are trusted only
until the bracketing pair separates.  Beyond that 1 - u is continued as a
two-point problem (its forcing N^2 (1-v)^2/r^2 gives an algebraic tail when
e^eta decays), and 1 - v from a backward-integrated Riccati equation for
its log-derivative, which is stable in that direction.
"""
from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate

from . import _ode
from .errors import (BracketNotFound, NoConvergence, NonMonotoneTail, StepFailure,
                     TailNotReached)
from .fitting import decay_fit
from .metric import POWER_LAW, SELF_CONSISTENT, radial_log_metric, radial_log_metric_slope
from .params import PhysicalParams, RadialGrid, make_radial_grid, require_valid

STANDARD = "standard"
EULER_LAGRANGE = "euler-lagrange"
TAIL_TOL = 0.02
SERIES_RTOL = 1e-12
_MATCH_REL = 1e-6


# ---------------------------------------------------------------------------
# profiles and metric


@dataclass
class RadialProfile:
    grid: RadialGrid
    values: np.ndarray
    derivs: np.ndarray
    info: object = field(default=None, repr=False, compare=False)  # ShootInfo when shot

    @property
    def r(self):
        return self.grid.nodes

    def __call__(self, r):
        """Cubic-Hermite evaluation; 1 beyond r_max, leading power law below r_min."""
        return _hermite_eval(self.r, self.values, self.derivs, r)

    @classmethod
    def from_function(cls, grid, f, df):
        r = grid.nodes
        return cls(grid, np.asarray(f(r), dtype=float), np.asarray(df(r), dtype=float))

    def copy(self):
        return RadialProfile(self.grid, self.values.copy(), self.derivs.copy())


def _hermite_eval(rn, val, der, r):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    out = np.empty_like(r)
    k = np.clip(np.searchsorted(rn, r) - 1, 0, rn.size - 2)
    H = rn[k + 1] - rn[k]
    t = (r - rn[k]) / H
    t2, t3 = t * t, t * t * t
    out = ((2 * t3 - 3 * t2 + 1) * val[k] + (t3 - 2 * t2 + t) * H * der[k]
           + (-2 * t3 + 3 * t2) * val[k + 1] + (t3 - t2) * H * der[k + 1])
    out = np.where(r > rn[-1], 1.0, out)
    # below the grid follow the local power law f ~ f(r0) (r/r0)^p
    p = rn[0] * der[0] / val[0] if val[0] != 0 else 0.0
    out = np.where(r < rn[0], val[0] * (np.maximum(r, 0) / rn[0]) ** p, out)
    return out if out.size > 1 else float(out[0])


def default_v_init(grid):
    return RadialProfile.from_function(grid, lambda r: r * r / (1 + r * r),
                                       lambda r: 2 * r / (1 + r * r) ** 2)


@dataclass
class RadialMetric:
    """ln e^eta and its derivative on the radial grid."""

    mode: str
    eta: np.ndarray
    deta: np.ndarray
    grid: RadialGrid

    @property
    def values(self):
        return np.exp(self.eta)

    @classmethod
    def power_law(cls, params, grid):
        r = grid.nodes
        return cls(POWER_LAW, math.log(params.g0) - params.delta * np.log(r),
                   -params.delta / r, grid)

    @classmethod
    def self_consistent(cls, params, grid, u: RadialProfile):
        r = grid.nodes
        uu = np.clip(u.values, 1e-300, None)
        return cls(SELF_CONSISTENT, radial_log_metric(r, uu, params),
                   radial_log_metric_slope(r, uu, u.derivs, params), grid)

    def log_below(self, s):
        """ln e^eta for s <= r_min, continued with the local log-log slope."""
        r0 = self.grid.nodes[0]
        return self.eta[0] + r0 * self.deta[0] * np.log(s / r0)


def _par(params, metric, v_equation):
    if v_equation not in (STANDARD, EULER_LAGRANGE):
        raise ValueError(f"unknown v_equation {v_equation!r}")
    tab = 0.0 if metric.mode == POWER_LAW else 1.0
    lng0 = math.log(params.g0) if params.g0 > 0 else -np.inf
    return np.array([params.N, params.lam, lng0, params.delta,
                     1.0 if v_equation == EULER_LAGRANGE else 0.0, tab])


# ---------------------------------------------------------------------------
# outcomes


A1, A2, A3 = "A1", "A2", "A3"
B1, B2, B3 = "B1", "B2", "B3"
_CLASS = {_ode.TURNED_DOWN: 0, _ode.CROSSED_ONE: 1, _ode.REACHED_END: 2}


@dataclass
class ShootingOutcome:
    cls: str
    exit_r: float
    state: tuple
    param: float
    trajectory: np.ndarray = field(repr=False)  # (n, 2) node states, NaN past exit

    @property
    def kind(self):
        """'1', '2' or '3' irrespective of the A/B family."""
        return self.cls[1]


def _classify(status, family, r, state, param, traj):
    if status == _ode.STEP_FAILURE:
        raise StepFailure(f"integration failed at r = {r:.6g} (state {state})", r=r, state=state)
    return ShootingOutcome(family + str(_CLASS[status] + 1), r, state, param, traj)


# ---------------------------------------------------------------------------
# local series


class _USeries:
    """u = a r^N + (a/2N) r^{N+2} [I1 + a^2 I3] after one Picard pass."""

    def __init__(self, r, v_profile, params, metric):
        N, lam = params.N, params.lam
        self.r, self.N = r, N
        r0 = metric.grid.nodes[0]

        def v_at(s):
            if s <= r0:
                return v_profile.values[0] * (s / r0) ** 2
            return _hermite_eval(v_profile.r, v_profile.values, v_profile.derivs, s)

        def em(s):
            if s <= r0:
                return math.exp(metric.log_below(s))
            return math.exp(float(_hermite_eval(metric.grid.nodes, metric.eta, metric.deta, s)))

        def X1(s):
            v = v_at(s)
            return N * N * (v * v - 2 * v) / (s * s) - 0.5 * lam * em(s)

        def X3(s):
            return 0.5 * lam * em(s) * s ** (2 * N)

        def quad(f, w):
            return integrate.quad(lambda t: w(t) * f(r * t), 0.0, 1.0, epsabs=0.0,
                                  epsrel=SERIES_RTOL, limit=200)[0]

        self.I1 = quad(X1, lambda t: t - t ** (2 * N + 1))
        self.I3 = quad(X3, lambda t: t - t ** (2 * N + 1))
        self.J1 = quad(X1, lambda t: t + t ** (2 * N + 1))
        self.J3 = quad(X3, lambda t: t + t ** (2 * N + 1))

    def __call__(self, a):
        r, N = self.r, self.N
        u = a * r ** N + a / (2 * N) * r ** (N + 2) * (self.I1 + a * a * self.I3)
        du = a * N * r ** (N - 1) + 0.5 * a * r ** (N + 1) * (self.J1 + a * a * self.J3)
        return u, du


class _VSeries:
    """v = b r^2 + (r^2/2) int_0^1 (1/t - t) u^2 (b r^2 t^2 - 1) e^eta dt (standard form).

    For the Euler-Lagrange form the leading power is r^p with
    p = 2 + r eta'(r) at r_min and no correction is added.
    """

    def __init__(self, r, u_profile, params, metric, v_equation):
        N = params.N
        self.r = r
        r0 = metric.grid.nodes[0]
        self.el = v_equation == EULER_LAGRANGE
        self.p = 2.0 + r0 * metric.deta[0] if self.el else 2.0

        def u_at(s):
            if s <= r0:
                return u_profile.values[0] * (s / r0) ** N
            return _hermite_eval(u_profile.r, u_profile.values, u_profile.derivs, s)

        def em(s):
            if s <= r0:
                return math.exp(metric.log_below(s))
            return math.exp(float(_hermite_eval(metric.grid.nodes, metric.eta, metric.deta, s)))

        def quad(f):
            return integrate.quad(f, 0.0, 1.0, epsabs=0.0, epsrel=SERIES_RTOL, limit=200)[0]

        if self.el:
            self.K0 = self.K2 = self.D0 = self.D2 = 0.0
        else:
            Y = lambda t: u_at(r * t) ** 2 * em(r * t)
            self.K0 = quad(lambda t: (1 / t - t) * Y(t))
            self.K2 = quad(lambda t: (1 / t - t) * t * t * Y(t))
            self.D0 = quad(lambda t: Y(t) / t)
            self.D2 = quad(lambda t: t * Y(t))

    def __call__(self, b):
        r, p = self.r, self.p
        r2 = r * r
        v = b * r ** p + 0.5 * r2 * (b * r2 * self.K2 - self.K0)
        dv = p * b * r ** (p - 1) + r * (b * r2 * self.D2 - self.D0)
        return v, dv


def local_series_u(a, r, v_profile, params, metric=None):
    """(u, u') at small r from the leading term plus one Picard correction."""
    metric = metric or RadialMetric.power_law(params, v_profile.grid)
    return _USeries(r, v_profile, params, metric)(a)


def local_series_v(b, r, u_profile, params, metric=None, v_equation=STANDARD):
    metric = metric or RadialMetric.power_law(params, u_profile.grid)
    return _VSeries(r, u_profile, params, metric, v_equation)(b)


# ---------------------------------------------------------------------------
# single integrations


class _Problem:
    """One shooting problem (u given v, or v given u) on a fixed grid."""

    def __init__(self, which, partner, params, metric, v_equation=STANDARD, rtol=1e-10):
        self.which = which
        self.partner = partner
        self.params = params
        self.metric = metric
        self.v_equation = v_equation
        self.rtol = rtol
        self.grid = partner.grid
        self.rn = np.ascontiguousarray(self.grid.nodes)
        self.par = _par(params, metric, v_equation)
        r0 = self.rn[0]
        if which == "u":
            self.series = _USeries(r0, partner, params, metric)
        else:
            self.series = _VSeries(r0, partner, params, metric, v_equation)
        self.cache = {}

    def outcome(self, param) -> ShootingOutcome:
        param = float(param)
        if param in self.cache:
            return self.cache[param]
        y0 = self.series(param)
        kind = 0 if self.which == "u" else 1
        status, r, state, traj, _ = _ode.run(kind, y0, 0, self.rn.size - 1, self.rn,
                                             self.partner.values, self.partner.derivs,
                                             self.metric.eta, self.metric.deta, self.par,
                                             rtol=self.rtol)
        out = _classify(status, "A" if self.which == "u" else "B", r, state, param, traj)
        self.cache[param] = out
        return out

    def tail(self, k_m, w_m, tail_partner=None):
        """Continue 1 - f beyond node k_m; returns (1 - f, -(f')) on nodes k_m..end."""
        if self.which == "u":
            return self._u_tail(k_m, w_m)
        return self._v_tail(k_m, w_m, tail_partner)

    def _u_tail(self, k_m, w_m):
        # w = 1 - u obeys
        #   w'' = -w'/r - N^2 z^2 (1-w)/r^2 + lam/2 (2w - w^2)(1-w) e^eta,  z = 1 - v,
        # whose decaying solution is the exponential mode plus the algebraic
        # response to N^2 z^2/r^2.  Solved as a two-point problem with the
        # quasi-static balance at r_max.
        rn = self.rn[k_m:]
        p = self.params
        N2, lam = p.N ** 2, p.lam
        c = self.partner
        m = self.metric

        def coeffs(r):
            z = 1.0 - _hermite_eval(c.r, c.values, c.derivs, r)
            em = np.exp(_hermite_eval(m.grid.nodes, m.eta, m.deta, r))
            return z, em

        def f(r, y):
            w, dw = y * w_m
            z, em = coeffs(r)
            acc = -dw / r - N2 * z * z * (1 - w) / (r * r) + 0.5 * lam * (2 * w - w * w) * (1 - w) * em
            return np.vstack([dw, acc]) / w_m

        z_end, em_end = coeffs(np.array([rn[-1], rn[-1]]))
        w_end = N2 * z_end[0] ** 2 / (rn[-1] ** 2 * lam * em_end[0])

        def bc(ya, yb):
            return np.array([ya[0] - 1.0, yb[0] - w_end / w_m])

        z, em = coeffs(rn)
        kap = np.sqrt(lam * em)
        hom = np.exp(-np.concatenate([[0.0], np.cumsum(0.5 * np.diff(rn) * (kap[1:] + kap[:-1]))]))
        part = N2 * z * z / (rn * rn * lam * em)
        guess = hom * (1.0 - part[0]) + part
        dguess = np.gradient(guess, rn)
        res = integrate.solve_bvp(f, bc, rn, np.vstack([guess, dguess]) / w_m, tol=1e-9,
                                  max_nodes=200000, bc_tol=1e-12)
        if not res.success:
            raise StepFailure(f"u-tail boundary problem failed: {res.message}", r=float(rn[0]))
        y = res.sol(rn) * w_m
        return y[0], y[1]

    def _v_tail(self, k_m, w_m, c):
        # z = 1 - v solves a homogeneous equation; its log-derivative q obeys a
        # Riccati equation that is stable when integrated from r_max inwards
        rn = self.rn
        n = rn.size
        kind = 3
        em_end = math.exp(self.metric.eta[-1])
        q_end = -math.sqrt(c.values[-1] ** 2 * em_end) + 0.5 / rn[-1]
        status, r, _, traj, _ = _ode.run(kind, (q_end, 0.0), n - 1, k_m, rn, c.values, c.derivs,
                                         self.metric.eta, self.metric.deta, self.par,
                                         rtol=self.rtol, classify=False)
        if status != _ode.REACHED_END:
            raise StepFailure(f"tail integration failed at r = {r:.6g}", r=r)
        q = traj[k_m:, 0]
        # q' at the nodes gives a quadrature exact for cubics
        dq = np.array([_ode._rhs(kind, rn[k], traj[k, 0], 0.0, min(k, n - 2), rn, c.values, c.derivs,
                                 self.metric.eta, self.metric.deta, self.par)[0]
                       for k in range(k_m, n)])
        H = np.diff(rn[k_m:])
        seg = 0.5 * H * (q[:-1] + q[1:]) + H * H / 12.0 * (dq[:-1] - dq[1:])
        w = w_m * np.exp(np.concatenate([[0.0], np.cumsum(seg)]))
        return w, q * w


# ---------------------------------------------------------------------------
# public shooting API


def _u_problem(v_profile, params, metric, rtol=1e-10):
    metric = metric or RadialMetric.power_law(params, v_profile.grid)
    return _Problem("u", v_profile, params, metric, rtol=rtol)


def integrate_u(a, v_profile, params, metric=None, rtol=1e-10) -> ShootingOutcome:
    """Integrate the u-equation from r_min with u ~ a r^N and classify into A1/A2/A3."""
    return _u_problem(v_profile, params, metric, rtol).outcome(a)


def integrate_v(b, u_profile, params, metric=None, v_equation=STANDARD, rtol=1e-10) -> ShootingOutcome:
    metric = metric or RadialMetric.power_law(params, u_profile.grid)
    return _Problem("v", u_profile, params, metric, v_equation, rtol).outcome(b)


@dataclass
class ShootInfo:
    bisections: int
    bracket: tuple
    r_match: float
    k_match: int
    tail_start_gap: float
    accepted_class: str
    width: float


def _resolved_end(o, tail_tol, r_max):
    """A3/B3 trajectory that has settled onto 1 (flat, not still climbing)."""
    f, df = o.trajectory[-1]
    return o.kind == "3" and f >= 1.0 - 10.0 * tail_tol and r_max * abs(df) <= tail_tol


def _shoot(problem: _Problem, bracket, bisect_tol, tail_tol, max_bisect=200, tail_partner=None):
    lo0, hi0 = bracket
    if not (0 < lo0 < hi0):
        raise ValueError(f"bad bracket {bracket}")
    lo_limit, hi_limit = lo0 * 1e-8, hi0 * 1e8
    lo, hi = lo0, hi0
    olo, ohi = problem.outcome(lo), problem.outcome(hi)
    accepted = None
    while accepted is None and not (olo.kind == "1" and ohi.kind == "2"):
        for o in (olo, ohi):
            if _resolved_end(o, tail_tol, problem.rn[-1]):
                accepted = o
        if accepted is not None:
            break
        if olo.kind != "1":
            if olo.kind == "2" and olo.param < ohi.param:
                hi, ohi = lo, olo
            lo /= 10.0
            if lo < lo_limit * (1 - 1e-12):
                raise BracketNotFound(
                    f"no {problem.which}-trajectory turning down for parameters >= {lo_limit:.3g}"
                )
            olo = problem.outcome(lo)
            continue
        if ohi.kind != "2":
            if ohi.kind == "1" and ohi.param > olo.param:
                lo, olo = hi, ohi
            hi *= 10.0
            if hi > hi_limit * (1 + 1e-12):
                raise BracketNotFound(
                    f"no {problem.which}-trajectory crossing 1 for parameters <= {hi_limit:.3g}"
                )
            ohi = problem.outcome(hi)

    it = 0
    if accepted is None:
        while hi - lo > bisect_tol and it < max_bisect:
            mid = 0.5 * (lo + hi)
            if mid <= lo or mid >= hi:
                break
            om = problem.outcome(mid)
            it += 1
            if om.kind == "1":
                lo, olo = mid, om
            elif om.kind == "2":
                hi, ohi = mid, om
            elif _resolved_end(om, tail_tol, problem.rn[-1]):
                accepted = om
                break
            else:
                raise TailNotReached(
                    f"{problem.which}-trajectory reaches r_max = {problem.rn[-1]:.3g} at "
                    f"{om.trajectory[-1, 0]:.4g} < 1 - 10*tail_tol"
                )
    if accepted is not None:
        star, omid = accepted.param, accepted
        traj = omid.trajectory
        k_m = problem.rn.size - 1
    else:
        star = 0.5 * (lo + hi)
        omid = problem.outcome(star)
        tl, th, tm = olo.trajectory[:, 0], ohi.trajectory[:, 0], omid.trajectory[:, 0]
        with np.errstate(invalid="ignore"):
            bad = ~(np.isfinite(tl) & np.isfinite(th) & np.isfinite(tm))
            bad |= np.abs(th - tl) > _MATCH_REL * np.abs(1.0 - tm)
        k_first = int(np.argmax(bad)) if bad.any() else problem.rn.size
        k_m = max(k_first - 1, 1)
        traj = omid.trajectory
    vals = traj[:, 0].copy()
    ders = traj[:, 1].copy()
    n = problem.rn.size
    gap = 0.0
    if k_m < n - 1:
        w_m = 1.0 - vals[k_m]
        if not (0 < w_m <= 10.0 * tail_tol):
            raise TailNotReached(
                f"{problem.which}-trajectories separate at r = {problem.rn[k_m]:.4g} with "
                f"1 - f = {w_m:.3g}; refine the bracket or extend the grid"
            )
        w, dw = problem.tail(k_m, w_m, tail_partner)
        gap = abs(-dw[0] - ders[k_m]) / max(abs(ders[k_m]), 1e-300)
        vals[k_m:] = 1.0 - w
        ders[k_m:] = -dw
    if vals[-1] < 1.0 - 10.0 * tail_tol:
        raise TailNotReached(f"{problem.which}(r_max) = {vals[-1]:.4g} < 1 - 10*tail_tol")
    info = ShootInfo(it, (lo, hi), float(problem.rn[k_m]), int(k_m), gap,
                     omid.cls, hi - lo)
    return star, RadialProfile(problem.grid, vals, ders, info)


def shoot_u(v_profile, params, bracket=(1e-2, 10.0), bisect_tol=1e-12, metric=None,
            tail_tol=TAIL_TOL, rtol=1e-10):
    """Bisect a between the A1 and A2 sets; returns (a_star, u profile).

    ``profile.info`` records the bisection count, final bracket and the
    radius beyond which the tail continuation replaces the trajectory.
    """
    problem = _u_problem(v_profile, params, metric, rtol)
    return _shoot(problem, bracket, bisect_tol, tail_tol)


def shoot_v(u_profile, params, bracket=(1e-2, 10.0), bisect_tol=1e-12, metric=None,
            tail_tol=TAIL_TOL, v_equation=STANDARD, rtol=1e-10):
    """Bisect b between the B1 and B2 sets; returns (b_star, v profile)."""
    metric = metric or RadialMetric.power_law(params, u_profile.grid)
    problem = _Problem("v", u_profile, params, metric, v_equation, rtol)
    return _shoot(problem, bracket, bisect_tol, tail_tol, tail_partner=u_profile)


# ---------------------------------------------------------------------------
# fixed point


@dataclass
class RadialSolution:
    params: PhysicalParams
    u: RadialProfile
    v: RadialProfile
    metric: RadialMetric
    a_star: float
    b_star: float
    outer_iters: int
    metric_mode: str
    v_equation: str
    history: list
    residual_u: float = float("nan")
    residual_v: float = float("nan")
    converged: bool = True
    omega_final: float = 1.0
    u_info: ShootInfo | None = None
    v_info: ShootInfo | None = None
    wall_time: float = 0.0

    @property
    def r(self):
        return self.u.grid.nodes

    @property
    def grid(self):
        return self.u.grid


def _initial_u(grid, N):
    return RadialProfile.from_function(
        grid,
        lambda r: (r * r / (1 + r * r)) ** (0.5 * N),
        lambda r: N * r ** (N - 1) / (1 + r * r) ** (0.5 * N + 1),
    )


def fixed_point_T(params, v_init=None, tol=1e-8, max_iter=50, omega=1.0, grid=None,
                  metric_mode=POWER_LAW, v_equation=STANDARD, tail_tol=TAIL_TOL,
                  bisect_tol=1e-12, rtol=1e-10) -> RadialSolution:
    """Damped Picard iteration v <- (1 - omega) v + omega T(v).

    omega is halved whenever the sup-change grows twice in a row.  With
    ``metric_mode="self-consistent"`` the metric is rebuilt from each new u.
    """
    t0 = time.perf_counter()
    require_valid(params)
    if params.N < 1:
        raise ValueError("the radial solver needs N >= 1")
    if not (0 < omega <= 1):
        raise ValueError("omega must lie in (0, 1]")
    grid = grid or make_radial_grid()
    v = (v_init or default_v_init(grid)).copy()
    if metric_mode == POWER_LAW:
        metric = RadialMetric.power_law(params, grid)
    elif metric_mode == SELF_CONSISTENT:
        metric = RadialMetric.self_consistent(params, grid, _initial_u(grid, params.N))
    else:
        raise ValueError(f"unknown metric mode {metric_mode!r}")

    a_br, b_br = (1e-2, 10.0), (1e-2, 10.0)
    history = []
    converged = False
    u = vt = None
    a_star = b_star = float("nan")
    for it in range(1, max_iter + 1):
        a_star, u = shoot_u(v, params, a_br, bisect_tol, metric, tail_tol, rtol)
        if metric_mode == SELF_CONSISTENT:
            metric = RadialMetric.self_consistent(params, grid, u)
        b_star, vt = shoot_v(u, params, b_br, bisect_tol, metric, tail_tol, v_equation, rtol)
        new = RadialProfile(grid, (1 - omega) * v.values + omega * vt.values,
                            (1 - omega) * v.derivs + omega * vt.derivs)
        change = float(np.abs(new.values - v.values).max())
        history.append(change)
        v = new
        if change < tol:
            converged = True
            break
        if len(history) >= 3 and history[-1] > history[-2] > history[-3]:
            omega *= 0.5
        a_br = (0.95 * a_star, 1.05 * a_star)
        b_br = (0.95 * b_star, 1.05 * b_star)

    sol = RadialSolution(params, u, v, metric, a_star, b_star, len(history), metric_mode,
                         v_equation, history, converged=converged, omega_final=omega,
                         u_info=u.info, v_info=vt.info)
    sol.residual_u, sol.residual_v = collocation_residuals(sol)
    sol.wall_time = time.perf_counter() - t0
    if not converged:
        osc = sum(1 for x, y in zip(history, history[1:]) if y > x)
        raise NoConvergence(
            f"fixed-point iteration stalled after {len(history)} steps (last change {history[-1]:.3e})",
            state=sol,
            diagnosis=(f"sup-change increased {osc} times; try a smaller omega"
                       if osc else "slow contraction; raise max_iter"),
        )
    return sol


# ---------------------------------------------------------------------------
# residuals and properties


def fornberg_weights(z, x, m):
    """Finite-difference weights for derivatives 0..m at z from nodes x."""
    n = len(x)
    c = np.zeros((n, m + 1))
    c1, c4 = 1.0, x[0] - z
    c[0, 0] = 1.0
    for i in range(1, n):
        mn = min(i, m)
        c2, c5, c4 = 1.0, c4, x[i] - z
        for j in range(i):
            c3 = x[i] - x[j]
            c2 *= c3
            if j == i - 1:
                for k in range(mn, 0, -1):
                    c[i, k] = c1 * (k * c[i - 1, k - 1] - c5 * c[i - 1, k]) / c2
                c[i, 0] = -c1 * c5 * c[i - 1, 0] / c2
            for k in range(mn, 0, -1):
                c[j, k] = (c4 * c[j, k] - k * c[j, k - 1]) / c3
            c[j, 0] = c4 * c[j, 0] / c3
        c1 = c2
    return c


def derivative_5pt(r, f):
    """d f/dr at interior nodes from 5-point nonuniform stencils (NaN at 2 ends)."""
    out = np.full_like(f, np.nan)
    for k in range(2, r.size - 2):
        w = fornberg_weights(r[k], r[k - 2:k + 3], 1)[:, 1]
        out[k] = w @ f[k - 2:k + 3]
    return out


def collocation_residuals(sol: RadialSolution):
    r = sol.r
    p = sol.params
    u, du = sol.u.values, sol.u.derivs
    v, dv = sol.v.values, sol.v.derivs
    em = np.exp(sol.metric.eta)
    d2u = derivative_5pt(r, du)
    d2v = derivative_5pt(r, dv)
    ru = d2u + du / r - p.N ** 2 * (v - 1) ** 2 * u / r ** 2 - 0.5 * p.lam * (u * u - 1) * u * em
    rv = d2v - dv / r - u * u * (v - 1) * em
    if sol.v_equation == EULER_LAGRANGE:
        rv -= sol.metric.deta * dv
    return float(np.nanmax(np.abs(ru))), float(np.nanmax(np.abs(rv)))


@dataclass
class PropertyCheck:
    name: str
    status: str  # pass / fail / ambiguous / flag
    message: str


@dataclass
class PropertyReport:
    checks: list
    alpha: object = None
    beta: object = None

    @property
    def violations(self):
        return [c for c in self.checks if c.status == "fail"]

    def status(self, prefix):
        return next(c.status for c in self.checks if c.name.startswith(prefix))

    def summary(self):
        return "\n".join(f"{c.status:9s} {c.name}: {c.message}" for c in self.checks)


def _tail_window(r, w, lo=1e-8, hi=1e-2):
    return (w >= lo) & (w <= hi)


def verify_radial_properties(sol, r_small=0.1, deriv_tol=1e-4, mono_tol=1e-10,
                             u=None, v=None, N=None, delta=None) -> PropertyReport:
    """Check bounds/monotonicity, u'(0)=v'(0)=0, the r^-N u and r^-2 v behaviour
    near 0 and the tail exponent window 1 < alpha < 2 + 2 beta - delta.

    ``sol`` may be a RadialSolution or None with explicit ``u``/``v``
    profiles (for hand-built tests).
    """
    if sol is not None:
        u, v = sol.u, sol.v
        N, delta = sol.params.N, sol.params.delta
    r = u.grid.nodes
    checks = []

    # (i)
    bad = []
    for name, f in (("u", u), ("v", v)):
        if f.values.min() < -1e-12 or f.values.max() > 1 + 1e-12:
            bad.append(f"{name} leaves [0,1] (range {f.values.min():.3g}..{f.values.max():.3g})")
        if f.derivs.min() < -mono_tol:
            bad.append(f"{name}' reaches {f.derivs.min():.3g}")
    checks.append(PropertyCheck("(i) bounds and monotonicity", "fail" if bad else "pass",
                                "; ".join(bad) or "0<=u,v<=1, u'>=0, v'>=0"))

    # (ii) linear extrapolation of the derivative from the first two nodes
    def d0(f):
        return f.derivs[0] - r[0] * (f.derivs[1] - f.derivs[0]) / (r[1] - r[0])

    du0, dv0 = d0(u), d0(v)
    ok = abs(du0) < deriv_tol and abs(dv0) < deriv_tol
    msg = f"u'(0) ~ {du0:.2e}, v'(0) ~ {dv0:.2e}"
    if N is not None and N <= 1:
        checks.append(PropertyCheck("(ii) u'(0)=v'(0)=0", "flag",
                                    msg + "; N=1 is outside the hypothesis N>1 (u'(0)=a there)"))
    else:
        checks.append(PropertyCheck("(ii) u'(0)=v'(0)=0", "pass" if ok else "fail", msg))

    # (iii) r^-N u and r^-2 v non-increasing and bounded near 0
    m = r <= r_small
    bad = []
    for name, f, p in (("r^-N u", u, N), ("r^-2 v", v, 2)):
        g = f.values[m] / r[m] ** p
        if not np.all(np.isfinite(g)):
            bad.append(f"{name} not finite")
            continue
        if np.any(np.diff(g) > 1e-8 * np.abs(g[:-1]) + 1e-300):
            bad.append(f"{name} increases")
        # boundedness: log-log slope of g at the inner end
        slope = (math.log(abs(g[1]) + 1e-300) - math.log(abs(g[0]) + 1e-300)) / math.log(r[1] / r[0])
        if slope < -0.1:
            bad.append(f"{name} unbounded as r->0 (log-slope {slope:.2f})")
    checks.append(PropertyCheck("(iii) r^-N u, r^-2 v bounded and non-increasing",
                                "fail" if bad else "pass", "; ".join(bad) or "ok"))

    # (iv) tail exponents; the continuation past the match point solves the
    # same equations, so the whole profile is usable
    alpha = beta = None
    try:
        mu = _tail_window(r, 1 - u.values)
        mv = _tail_window(r, 1 - v.values)
        alpha = decay_fit(r[mu], 1 - u.values[mu], min_samples=10, check_span=False)
        beta = decay_fit(r[mv], 1 - v.values[mv], min_samples=10, check_span=False)
    except NonMonotoneTail as exc:
        checks.append(PropertyCheck("(iv) tail exponents", "ambiguous", f"fit unavailable: {exc}"))
    else:
        d = delta or 0.0
        lo_a, hi_a = alpha.ci
        lo_b, hi_b = beta.ci
        msg = (f"alpha = {alpha.exponent:.3f} [{lo_a:.3f}, {hi_a:.3f}], "
               f"beta = {beta.exponent:.3f} [{lo_b:.3f}, {hi_b:.3f}], delta = {d:.3g}")
        if lo_a > 1 and lo_b > 0 and hi_a < 2 + 2 * lo_b - d:
            status = "pass"
        elif hi_a <= 1 or hi_b <= 0 or lo_a >= 2 + 2 * hi_b - d:
            status = "fail"
        else:
            status = "ambiguous"
        checks.append(PropertyCheck("(iv) tail exponents", status, msg))
    return PropertyReport(checks, alpha, beta)
