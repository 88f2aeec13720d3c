"""Physical parameters, vortex configurations and sampling grids."""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import GridError, InadmissibleParams, VortexTooCloseToBoundary

# slack for the closed boundary 4*pi*G*N == 1 (e.g. G = 1/(8 pi), N = 2)
_ADMISSIBLE_SLACK = 1e-12


@dataclass(frozen=True)
class PhysicalParams:
    """Coupling ``lam``, Newton constant ``G``, metric scale ``g0`` and vortex points.

    Multiplicities are realized as coincident entries of ``points``.
    Construction does not check admissibility; use :func:`validate` or
    :func:`require_valid`.
    """

    lam: float = 1.0
    G: float = 0.0
    g0: float = 1.0
    points: tuple = ()

    def __post_init__(self):
        pts = tuple((float(p[0]), float(p[1])) for p in self.points)
        object.__setattr__(self, "points", pts)

    @property
    def N(self) -> int:
        return len(self.points)

    @property
    def delta(self) -> float:
        """Cone exponent 8 pi G N of the asymptotic metric."""
        return 8.0 * math.pi * self.G * self.N

    @property
    def deficit_angle(self) -> float:
        return 8.0 * math.pi**2 * self.G * self.N

    def replace(self, **changes) -> "PhysicalParams":
        data = dict(lam=self.lam, G=self.G, g0=self.g0, points=self.points)
        data.update(changes)
        return PhysicalParams(**data)


@dataclass(frozen=True)
class Check:
    name: str
    ok: bool
    message: str


@dataclass(frozen=True)
class ValidationReport:
    checks: tuple
    delta: float
    deficit_angle: float
    notes: tuple = ()

    @property
    def passed(self) -> bool:
        return all(c.ok for c in self.checks)

    @property
    def failures(self) -> list:
        return [c for c in self.checks if not c.ok]

    def summary(self) -> str:
        lines = [f"{'ok ' if c.ok else 'FAIL'} {c.name}: {c.message}" for c in self.checks]
        lines += [f"note {n}" for n in self.notes]
        return "\n".join(lines)


def validate(params: PhysicalParams) -> ValidationReport:
    """Check the admissibility constraints; never raises."""
    fourpiGN = 4.0 * math.pi * params.G * params.N
    checks = (
        Check("lambda>0", params.lam > 0, f"lambda = {params.lam!r}"),
        Check("g0>0", params.g0 > 0, f"g0 = {params.g0!r}"),
        Check("G>=0", params.G >= 0, f"G = {params.G!r}"),
        Check(
            "4*pi*G*N<=1",
            fourpiGN <= 1.0 + _ADMISSIBLE_SLACK,
            f"4*pi*G*N = {fourpiGN:.12g} (deficit angle 8*pi^2*G*N must stay below 2*pi)",
        ),
    )
    notes = []
    if params.N <= 1:
        notes.append("N<=1 is outside the radial existence hypothesis N>1")
    if not (0.0 < params.delta <= 1.0 + _ADMISSIBLE_SLACK):
        notes.append(
            f"delta = {params.delta:.6g} is outside the radial hypothesis 0<delta<=1"
            + (" (flat-space limit)" if params.delta == 0 else "")
        )
    return ValidationReport(checks, params.delta, params.deficit_angle, tuple(notes))


def require_valid(params: PhysicalParams) -> ValidationReport:
    report = validate(params)
    if not report.passed:
        raise InadmissibleParams(
            "inadmissible parameters:\n" + "\n".join(c.message for c in report.failures)
        )
    return report


@dataclass(frozen=True)
class Grid2D:
    """Uniform node grid on [-R, R]^2 with ``n`` nodes per axis (origin on-grid)."""

    R: float
    n: int

    @property
    def h(self) -> float:
        return 2.0 * self.R / (self.n - 1)

    @property
    def x(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.n)

    def mesh(self):
        """Coordinate arrays X, Y with ``indexing='ij'`` (axis 0 is x)."""
        return np.meshgrid(self.x, self.x, indexing="ij")

    def radius(self, center=(0.0, 0.0)) -> np.ndarray:
        X, Y = self.mesh()
        return np.hypot(X - center[0], Y - center[1])

    def coarsened(self) -> "Grid2D":
        if (self.n - 1) % 2:
            raise GridError(f"n={self.n} cannot be coarsened")
        return Grid2D(self.R, (self.n - 1) // 2 + 1)


def make_grid(R: float, n: int, points: Sequence = ()) -> Grid2D:
    if n < 3 or n % 2 == 0:
        raise GridError(f"need an odd node count n >= 3, got {n}")
    if not R > 0:
        raise GridError(f"half-extent must be positive, got {R}")
    half = 0.5 * R
    for p in points:
        if not (abs(p[0]) < half and abs(p[1]) < half):
            raise VortexTooCloseToBoundary(
                f"vortex at {tuple(p)} lies outside the margin box [-{half}, {half}]^2"
            )
    return Grid2D(float(R), int(n))


@dataclass(frozen=True)
class RadialGrid:
    """Strictly increasing radial nodes, geometrically graded from ``r_min``."""

    nodes: np.ndarray = field(repr=False)

    def __post_init__(self):
        r = np.asarray(self.nodes, dtype=float)
        if r.ndim != 1 or r.size < 5:
            raise GridError("radial grid needs at least 5 nodes")
        if not np.all(np.diff(r) > 0) or r[0] <= 0:
            raise GridError("radial nodes must be positive and strictly increasing")
        object.__setattr__(self, "nodes", r)

    @property
    def r_min(self) -> float:
        return float(self.nodes[0])

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def __len__(self):
        return self.nodes.size


def make_radial_grid(r_min=1e-3, r_max=1e3, ratio=1.02, nodes=None) -> RadialGrid:
    """Geometric grid; ``nodes`` (a count) overrides ``ratio``."""
    if not (0 < r_min < r_max):
        raise GridError("need 0 < r_min < r_max")
    if r_max / r_min < 1e3:
        raise GridError(f"r_max/r_min = {r_max / r_min:.3g} < 1e3")
    if nodes is None:
        nodes = int(math.ceil(math.log(r_max / r_min) / math.log(ratio))) + 1
    r = np.geomspace(r_min, r_max, int(nodes))
    return RadialGrid(r)


# ---------------------------------------------------------------------------
# configuration files

SOLVER_DEFAULTS = {"tol": 1e-8, "max_iter": 50, "omega": 1.0, "max_inner": 500}
_REQUIRED = ("lambda", "G", "g0", "points")


def load_config(path) -> dict:
    with open(path) as fh:
        cfg = json.load(fh)
    check_config(cfg)
    return cfg


def check_config(cfg: dict) -> None:
    missing = [k for k in _REQUIRED if k not in cfg]
    if "grid" not in cfg and "radial" not in cfg:
        missing.append("grid|radial")
    if missing:
        raise KeyError(f"config is missing keys: {', '.join(missing)}")


def params_from_config(cfg: dict) -> PhysicalParams:
    return PhysicalParams(
        lam=float(cfg["lambda"]),
        G=float(cfg["G"]),
        g0=float(cfg["g0"]),
        points=tuple(tuple(p) for p in cfg["points"]),
    )


def solver_options(cfg: dict) -> dict:
    opts = dict(SOLVER_DEFAULTS)
    opts.update(cfg.get("solver", {}))
    return opts
