"""Exception hierarchy shared by all subpackages."""


class TractionError(Exception):
    """Base class for errors raised by this package."""


class DomainError(TractionError, ValueError):
    """An argument is outside the domain of a formula."""


class IntegrationError(TractionError, ArithmeticError):
    """Numerical integration produced non-finite values."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state


class CovarianceDegeneracyError(TractionError, ArithmeticError):
    """A covariance matrix could not be factorized even after jitter."""


class PropagationError(TractionError, ArithmeticError):
    """A sigma point became non-finite when pushed through the model."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class SingularInnovationError(TractionError, ArithmeticError):
    """The innovation covariance is not invertible."""


class DegenerateFitError(TractionError, ValueError):
    """Least-squares scale fit has no information (all regressors zero)."""


class UndefinedMetricError(TractionError, ValueError):
    """A goodness-of-fit metric is undefined for the given data."""


class ConfigError(TractionError, ValueError):
    """A scenario or estimator configuration is invalid."""


class DataError(TractionError, ValueError):
    """An input data file is unreadable or ill-formed."""
