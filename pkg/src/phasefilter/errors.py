"""Exception hierarchy shared by all phasefilter modules.

The command line maps these onto process exit codes: validation problems
(ShapeError / DomainError / ScaleError) exit with 2, non-convergence with 3,
and I/O failures with 4.
"""


class PhaseFilterError(Exception):
    """Base class for all errors raised by this package."""


class ShapeError(PhaseFilterError, ValueError):
    """An array argument has the wrong rank, size, or dtype-compatible shape."""


class DomainError(PhaseFilterError, ValueError):
    """A scalar or matrix argument violates a documented precondition."""


class ScaleError(PhaseFilterError, ValueError):
    """A requested computation exceeds the supported problem scale."""


class UnsupportedScaleError(ScaleError):
    """Exact computation is not tractable at this size; use the Monte Carlo bound."""


class NonConvergenceError(PhaseFilterError, RuntimeError):
    """An iterative routine exhausted its budget without meeting its target.

    Carries the best residual seen so callers can report how close it got.
    """

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual


class FilteredToZeroError(PhaseFilterError, RuntimeError):
    """The filtered state norm fell below the underflow floor; caller restarts."""


class OracleError(PhaseFilterError, RuntimeError):
    """The brute-force eigensolver failed to converge within its sweep budget."""


class ParseError(PhaseFilterError, ValueError):
    """A matrix file or report payload could not be parsed."""
