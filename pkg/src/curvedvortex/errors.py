"""Exception types raised by the solvers."""


class VortexError(Exception):
    """Base class for all package errors."""


class InadmissibleParams(VortexError, ValueError):
    pass


class GridError(VortexError, ValueError):
    pass


class VortexTooCloseToBoundary(GridError):
    pass


class NonFiniteMetric(VortexError, FloatingPointError):
    pass


class LinearSolveStall(VortexError, RuntimeError):
    pass


class NoConvergence(VortexError, RuntimeError):
    """Raised when an iteration exhausts its budget.

    The partially converged state is attached as ``state`` so callers
    (the CLI in particular) can still write artifacts.
    """

    def __init__(self, message, state=None, diagnosis=None):
        super().__init__(message)
        self.state = state
        self.diagnosis = diagnosis


class MonotonicityViolation(VortexError, RuntimeError):
    pass


class StepFailure(VortexError, RuntimeError):
    def __init__(self, message, r=None, state=None):
        super().__init__(message)
        self.r = r
        self.state = state


class BracketNotFound(VortexError, RuntimeError):
    pass


class TailNotReached(VortexError, RuntimeError):
    pass


class BranchCutArtifact(VortexError, RuntimeError):
    pass


class NonMonotoneTail(VortexError, ValueError):
    pass
