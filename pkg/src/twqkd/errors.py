"""Exception types shared across the package."""


class UnphysicalEigenvalueError(ValueError):
    """A symplectic eigenvalue fell below the physical threshold (1 - 1e-9)."""


class UnphysicalStateError(ValueError):
    """A covariance matrix violates the uncertainty bound.

    Carries the offending symplectic spectrum for diagnostics.
    """

    def __init__(self, message, spectrum=None):
        super().__init__(message)
        self.spectrum = spectrum


class DimensionMismatchError(ValueError):
    """Operand dimensions are incompatible."""


class TruncationError(RuntimeError):
    """A truncated series failed to converge within the hard term cap."""


class DegenerateEstimatorError(ValueError):
    """Bob's estimator quadrature has (numerically) zero variance."""


class AccuracyWarning(UserWarning):
    """A numerical-integration grid is too coarse for the requested accuracy."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the offending key and line number."""

    def __init__(self, message, key=None, line=None):
        super().__init__(message)
        self.key = key
        self.line = line
