"""Exception types shared across the package.

The CLI maps these onto process exit codes: usage errors exit 1,
ingestion errors exit 2, numerical failures exit 3.
"""


class WlassoError(Exception):
    """Base class for all package-specific errors."""


class DomainError(WlassoError, ValueError):
    """An argument is outside the domain an operation is defined on."""


class IngestionError(WlassoError):
    """Malformed or unreadable input data."""


class NumericalError(WlassoError):
    """Base class for failures of the numerical routines."""


class LinearPredictorOverflow(NumericalError, OverflowError):
    """A linear predictor entry would overflow exp(); carries the row index."""

    def __init__(self, row: int, value: float):
        self.row = int(row)
        self.value = float(value)
        super().__init__(
            f"linear predictor overflow at row {self.row}: theta={self.value:.6g} > 700"
        )


class UnboundedProblemError(NumericalError):
    """The penalized objective is unbounded below (degenerate column/weight)."""


class SingularHessianError(NumericalError):
    """A Hessian block required to be invertible is singular at some point."""

    def __init__(self, message: str, point=None):
        self.point = point
        super().__init__(message)


class InfeasibleCalibrationError(NumericalError):
    """No penalty level satisfies the requested calibration displays."""

    def __init__(self, display: str, message: str):
        self.display = display
        super().__init__(message)
