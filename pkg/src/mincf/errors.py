"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class ConfigError(ValueError):
    """A distribution spec, study config or data file failed validation."""


class DegenerateSampleError(ValueError):
    """The sample admits no maximum-likelihood fit (too small or constant)."""


class ConvergenceError(RuntimeError):
    """An iterative solver exhausted its budget without meeting tolerance."""

    def __init__(self, message, *, iterations=None, residual=None):
        super().__init__(message)
        self.iterations = iterations
        self.residual = residual


class IntegrationError(RuntimeError):
    """Adaptive quadrature could not reach the requested tolerance.

    Carries the best estimate and the achieved error bound so callers can
    decide whether the partial result is still usable.
    """

    def __init__(self, message, *, estimate, error):
        super().__init__(message)
        self.estimate = estimate
        self.error = error


class EngineError(RuntimeError):
    """The Monte Carlo engine hit a persistent failure (e.g. MLE breakdown)."""
