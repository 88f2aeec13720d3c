"""Readers and writers for fields, profiles, telemetry and reports."""
from __future__ import annotations

import json
import math
import struct

import numpy as np

MAGIC = b"VLXF0001"
FIELD_COLUMNS = ("x", "y", "u", "v", "eta", "F12")
PROFILE_COLUMNS = ("r", "u", "du", "v", "dv", "eta")
_FMT = "%.17g"


def _clean(obj):
    """JSON-safe copy: numpy scalars to python, non-finite floats to None."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        return x if math.isfinite(x) else None
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_json(path, data):
    with open(path, "w") as fh:
        json.dump(_clean(data), fh, indent=2, sort_keys=True, allow_nan=False)
        fh.write("\n")


def read_json(path):
    with open(path) as fh:
        return json.load(fh)


def _write_csv(path, header, cols):
    data = np.column_stack([np.asarray(c, dtype=float).ravel() for c in cols])
    np.savetxt(path, data, delimiter=",", header=",".join(header), comments="", fmt=_FMT)


def planar_field_arrays(sol, F12=None):
    """u, v, eta, F12 on the grid; u is the discrete U0 + v (finite everywhere).

    The default F12 is the self-dual value built from that same u column, so
    the file is self-consistent and F12 >= 0 wherever u <= 0.
    """
    if F12 is None:
        F12 = -0.5 * sol.metric.values * np.expm1(sol.u)
    return {"u": sol.u, "v": sol.v, "eta": sol.metric.eta, "F12": F12}


def write_fields_csv(path, sol, F12=None):
    """Row-major CSV with columns x,y,u,v,eta,F12 (x varies slowest)."""
    X, Y = sol.grid.mesh()
    f = planar_field_arrays(sol, F12)
    _write_csv(path, FIELD_COLUMNS, [X, Y, f["u"], f["v"], f["eta"], f["F12"]])


def read_fields_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    with open(path) as fh:
        header = fh.readline().strip().split(",")
    n = int(round(math.sqrt(data.shape[0])))
    return {name: data[:, k].reshape(n, n) for k, name in enumerate(header)}


def write_binary(path, n, R, fields: dict):
    """Magic, n (u64), R (f64), count (u64), names (u32 length + utf-8), arrays (f64), little-endian."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<QdQ", int(n), float(R), len(fields)))
        for name in fields:
            b = name.encode("utf-8")
            fh.write(struct.pack("<I", len(b)))
            fh.write(b)
        for arr in fields.values():
            a = np.ascontiguousarray(arr, dtype="<f8")
            if a.shape != (n, n):
                raise ValueError(f"field has shape {a.shape}, expected {(n, n)}")
            fh.write(a.tobytes(order="C"))


def read_binary(path):
    with open(path, "rb") as fh:
        if fh.read(8) != MAGIC:
            raise ValueError("not a field dump (bad magic)")
        n, R, count = struct.unpack("<QdQ", fh.read(24))
        names = []
        for _ in range(count):
            (k,) = struct.unpack("<I", fh.read(4))
            names.append(fh.read(k).decode("utf-8"))
        out = {}
        for name in names:
            out[name] = np.frombuffer(fh.read(8 * n * n), dtype="<f8").reshape(n, n).copy()
    return n, R, out


def write_profile_csv(path, sol):
    _write_csv(path, PROFILE_COLUMNS,
               [sol.r, sol.u.values, sol.u.derivs, sol.v.values, sol.v.derivs, sol.metric.eta])


def read_profile_csv(path):
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return {name: data[:, k] for k, name in enumerate(PROFILE_COLUMNS)}


def radial_telemetry(sol, report=None):
    alpha = beta = None
    if report is not None:
        alpha = getattr(report.alpha, "exponent", None)
        beta = getattr(report.beta, "exponent", None)
    return {"a_star": sol.a_star, "b_star": sol.b_star, "outer_iters": sol.outer_iters,
            "residual_u": sol.residual_u, "residual_v": sol.residual_v,
            "alpha_fit": alpha, "beta_fit": beta}


def planar_telemetry(sol):
    return {"outer_iters": sol.outer_iters, "inner_iters": list(sol.inner_iters),
            "residual": sol.residual, "residual_history": list(sol.residual_history),
            "max_increase": max(sol.max_increase) if sol.max_increase else None,
            "max_u": max(sol.max_u) if sol.max_u else None, "converged": sol.converged,
            "omega_final": sol.omega_final}
