"""Exception types shared across the package.

Three failure categories are distinguished so that callers (and the
command line driver) can map them to exit codes: caller mistakes,
mathematically invalid regimes, and quadrature/estimator accuracy
shortfalls.
"""


class LoopGammaError(Exception):
    """Base class for package errors."""


class UsageError(LoopGammaError, ValueError):
    """Caller violated a contract: bad shapes, grids, flags, or ranges."""


class DomainError(LoopGammaError, ValueError):
    """Input is outside the mathematically valid regime of the operation."""


class AccuracyError(LoopGammaError, RuntimeError):
    """A requested tolerance could not be certified."""

    def __init__(self, message: str, achieved: float | None = None):
        super().__init__(message)
        self.achieved = achieved


class EvaluationError(LoopGammaError, RuntimeError):
    """A functional failed while being evaluated on a sampled path."""

    def __init__(self, sample_index: int, original: BaseException):
        super().__init__(
            f"functional evaluation failed at sample index {sample_index}: {original!r}"
        )
        self.sample_index = sample_index
        self.original = original
