"""Exception hierarchy; the CLI maps it onto exit codes (2/3/4)."""


class TvmrfError(Exception):
    """Base class for everything raised deliberately by this package."""


class ConfigError(TvmrfError):
    """Bad parameters or flag combinations (exit code 2)."""


class DataError(TvmrfError):
    """Malformed or inconsistent input data (exit code 3)."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class NumericalError(TvmrfError):
    """Numerical failure such as singular or non-PD matrices (exit code 4)."""


class SingularCovarianceError(NumericalError):
    def __init__(self, t, cond):
        super().__init__(
            f"SINGULAR: thresholded covariance at t={t} is numerically singular "
            f"(condition estimate {cond:.3e}); increase the shrinkage threshold "
            f"or collect more samples at this time step"
        )
        self.t = t
        self.cond = cond


class NotPositiveDefiniteError(NumericalError):
    def __init__(self, t):
        super().__init__(f"matrix at t={t} is not positive definite")
        self.t = t


class ZeroMarginalError(NumericalError):
    def __init__(self, t, detail):
        super().__init__(
            f"ZERO_MARGINAL: empirical marginal {detail} at t={t} is zero; "
            f"enable Laplace smoothing (--alpha > 0)"
        )
        self.t = t
        self.detail = detail
