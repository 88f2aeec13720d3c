"""Multivortices of the Ginzburg-Landau model on a self-gravitating plane.

Planar self-dual solver (monotone iteration with the explicit metric
factor), radial solver for any lambda > 0 (nested shooting plus a
fixed-point map) and the quantized observables.
"""
__version__ = "0.1.0"

from .errors import (BracketNotFound, BranchCutArtifact, GridError, InadmissibleParams,
                     LinearSolveStall, MonotonicityViolation, NoConvergence, NonFiniteMetric,
                     NonMonotoneTail, StepFailure, TailNotReached, VortexError,
                     VortexTooCloseToBoundary)
from .params import (Grid2D, PhysicalParams, RadialGrid, make_grid, make_radial_grid, validate)

__all__ = [
    "BracketNotFound", "BranchCutArtifact", "GridError", "InadmissibleParams", "LinearSolveStall",
    "MonotonicityViolation", "NoConvergence", "NonFiniteMetric", "NonMonotoneTail", "StepFailure",
    "TailNotReached", "VortexError", "VortexTooCloseToBoundary", "Grid2D", "PhysicalParams",
    "RadialGrid", "make_grid", "make_radial_grid", "validate", "__version__",
]
