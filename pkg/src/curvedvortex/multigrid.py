"""Geometric multigrid for the shifted Poisson problem (Lap - kappa) w = f.

Vertex-centred grids with n = 2^k m + 1 nodes per axis, homogeneous
Dirichlet data on the outer ring, red-black Gauss-Seidel smoothing and
full-weighting / bilinear transfers.  Red-black ordering makes every sweep
deterministic.  With kappa >= 0 each smoothing sweep is a contraction.
"""
from __future__ import annotations

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from numba import njit

from .errors import LinearSolveStall

# a V(2,2) cycle applies this many smoothing sweeps on the finest level
SWEEPS_PER_CYCLE = 4
# residual reduction demanded from every window of 100 fine sweeps
STALL_WINDOW_SWEEPS = 100
STALL_FACTOR = 1e-2
# relative residual the solver always guarantees; tighter requests stop at the
# floating-point floor instead of stalling
CONTRACT_RTOL = 1e-10
_COARSEST = 5


@njit(cache=True)
def _rbgs(w, f, kappa, h2, sweeps):
    n = w.shape[0]
    for _ in range(sweeps):
        for color in range(2):
            for i in range(1, n - 1):
                j0 = 1 + ((i + color + 1) % 2)
                for j in range(j0, n - 1, 2):
                    s = w[i + 1, j] + w[i - 1, j] + w[i, j + 1] + w[i, j - 1]
                    w[i, j] = (s - h2 * f[i, j]) / (4.0 + h2 * kappa[i, j])


@njit(cache=True)
def _residual(w, f, kappa, h2, out):
    n = w.shape[0]
    inv = 1.0 / h2
    for i in range(n):
        out[i, 0] = 0.0
        out[i, n - 1] = 0.0
        out[0, i] = 0.0
        out[n - 1, i] = 0.0
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            lap = (w[i + 1, j] + w[i - 1, j] + w[i, j + 1] + w[i, j - 1] - 4.0 * w[i, j]) * inv
            out[i, j] = f[i, j] - (lap - kappa[i, j] * w[i, j])


@njit(cache=True)
def _restrict(r, out):
    nc = out.shape[0]
    for I in range(nc):
        out[I, 0] = 0.0
        out[I, nc - 1] = 0.0
        out[0, I] = 0.0
        out[nc - 1, I] = 0.0
    for I in range(1, nc - 1):
        i = 2 * I
        for J in range(1, nc - 1):
            j = 2 * J
            out[I, J] = (
                4.0 * r[i, j]
                + 2.0 * (r[i + 1, j] + r[i - 1, j] + r[i, j + 1] + r[i, j - 1])
                + r[i + 1, j + 1] + r[i + 1, j - 1] + r[i - 1, j + 1] + r[i - 1, j - 1]
            ) / 16.0


@njit(cache=True)
def _prolong_add(e, w):
    nc = e.shape[0]
    for I in range(nc):
        for J in range(nc):
            w[2 * I, 2 * J] += e[I, J]
    for I in range(nc - 1):
        for J in range(nc):
            w[2 * I + 1, 2 * J] += 0.5 * (e[I, J] + e[I + 1, J])
    for I in range(nc):
        for J in range(nc - 1):
            w[2 * I, 2 * J + 1] += 0.5 * (e[I, J] + e[I, J + 1])
    for I in range(nc - 1):
        for J in range(nc - 1):
            w[2 * I + 1, 2 * J + 1] += 0.25 * (e[I, J] + e[I + 1, J] + e[I, J + 1] + e[I + 1, J + 1])


def shifted_laplacian(w, kappa, h):
    """Apply the 5-point operator (Lap_h - kappa) on interior nodes (zero ring)."""
    out = np.zeros_like(w)
    _residual(w, np.zeros_like(w), kappa, h * h, out)
    return -out


def laplacian5(w, h):
    """Interior 5-point Laplacian of ``w``; the outer ring of the result is 0.

    Linear and odd in ``w`` bit for bit, so laplacian5(-w) == -laplacian5(w).
    """
    w = np.ascontiguousarray(w, dtype=float)
    out = np.empty_like(w)
    _lap5(w, 1.0 / (h * h), out)
    return out


@njit(cache=True)
def _lap5(w, inv, out):
    n = w.shape[0]
    for i in range(n):
        out[i, 0] = 0.0
        out[i, n - 1] = 0.0
        out[0, i] = 0.0
        out[n - 1, i] = 0.0
    for i in range(1, n - 1):
        for j in range(1, n - 1):
            out[i, j] = (w[i + 1, j] + w[i - 1, j] + w[i, j + 1] + w[i, j - 1] - 4.0 * w[i, j]) * inv


def _direct_matrix(n, kappa, h):
    m = n - 2
    T = sp.diags([1.0, -2.0, 1.0], [-1, 0, 1], shape=(m, m))
    I = sp.identity(m)
    A = (sp.kron(T, I) + sp.kron(I, T)) / (h * h)
    A = A - sp.diags(kappa[1:-1, 1:-1].ravel())
    return A.tocsc()


class _Level:
    def __init__(self, n, h, kappa):
        self.n = n
        self.h = h
        self.kappa = kappa
        self.coarse = None
        self.lu = None
        if n > _COARSEST and (n - 1) % 2 == 0:
            nc = (n - 1) // 2 + 1
            kc = np.empty((nc, nc))
            _restrict(kappa, kc)
            # boundary ring of kappa is irrelevant; keep coarse values non-negative
            np.maximum(kc, 0.0, out=kc)
            self.coarse = _Level(nc, 2.0 * h, kc)
            self.res = np.empty((n, n))
            self.rc = np.empty((nc, nc))
        elif n > 2:
            self.lu = spla.splu(_direct_matrix(n, kappa, h))

    def cycle(self, w, f, pre=2, post=2):
        if self.lu is not None:
            w[1:-1, 1:-1] = self.lu.solve(f[1:-1, 1:-1].ravel()).reshape(self.n - 2, self.n - 2)
            return
        if self.coarse is None:
            return
        h2 = self.h * self.h
        _rbgs(w, f, self.kappa, h2, pre)
        _residual(w, f, self.kappa, h2, self.res)
        _restrict(self.res, self.rc)
        ec = np.zeros_like(self.rc)
        self.coarse.cycle(ec, self.rc, pre, post)
        _prolong_add(ec, w)
        _rbgs(w, f, self.kappa, h2, post)


def linear_poisson_solve(rhs, kappa, h, w0=None, rtol=CONTRACT_RTOL, max_cycles=400,
                         info=None):
    """Solve (Lap_h - kappa) w = rhs with w = 0 on the outer ring.

    ``kappa`` may be a scalar or a nodewise array (>= 0).  Iterates V(2,2)
    cycles until the relative residual (max-norm, relative to ``rhs``) drops
    below ``rtol``.  Requests tighter than the 1e-10 contract end at the
    floating-point floor.  Raises :class:`LinearSolveStall` when a window of
    100 fine-level sweeps reduces the residual by less than 1e-2 before the
    contract is met.
    """
    rhs = np.ascontiguousarray(rhs, dtype=float)
    n = rhs.shape[0]
    if rhs.shape != (n, n):
        raise ValueError("rhs must be square")
    kappa = np.broadcast_to(np.asarray(kappa, dtype=float), rhs.shape).copy()
    if np.any(kappa < 0):
        raise ValueError("kappa must be non-negative")
    w = np.zeros_like(rhs) if w0 is None else np.array(w0, dtype=float)
    w[0, :] = w[-1, :] = w[:, 0] = w[:, -1] = 0.0

    f = rhs.copy()
    f[0, :] = f[-1, :] = f[:, 0] = f[:, -1] = 0.0
    scale = np.max(np.abs(f))
    history = []
    if scale == 0.0 and w0 is None:
        if info is not None:
            info.update(cycles=0, history=history)
        return w

    level = _Level(n, h, kappa)
    res = np.empty_like(w)
    _residual(w, f, kappa, h * h, res)
    rel = np.max(np.abs(res)) / (scale or 1.0)
    history.append(rel)
    window = STALL_WINDOW_SWEEPS // SWEEPS_PER_CYCLE
    cycles = 0
    while rel > rtol and cycles < max_cycles:
        level.cycle(w, f)
        cycles += 1
        _residual(w, f, kappa, h * h, res)
        prev, rel = rel, np.max(np.abs(res)) / (scale or 1.0)
        history.append(rel)
        if rel <= CONTRACT_RTOL and rel > 0.5 * prev:
            break  # floating-point floor
        if cycles >= window and rel > CONTRACT_RTOL and rel > STALL_FACTOR * history[-1 - window]:
            raise LinearSolveStall(
                f"residual reduced only {history[-1 - window] / rel:.3g}x over "
                f"{STALL_WINDOW_SWEEPS} sweeps (relative residual {rel:.3e})"
            )
    if rel > CONTRACT_RTOL:
        raise LinearSolveStall(f"relative residual {rel:.3e} after {cycles} cycles")
    if info is not None:
        info.update(cycles=cycles, history=history)
    return w
