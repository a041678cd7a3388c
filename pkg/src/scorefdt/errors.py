"""Exception hierarchy shared across the package."""


class ScoreFdtError(Exception):
    """Base class for all package errors."""


class DimensionError(ScoreFdtError):
    """Shape or dimension mismatch between inputs and a spec."""


class ConstructionError(ScoreFdtError):
    """Invalid parameters passed to a model or network constructor."""


class IntegrationError(ScoreFdtError):
    """Trajectory became non-finite during time stepping."""

    def __init__(self, message: str, step: int | None = None):
        super().__init__(message)
        self.step = step


class TrainingDivergedError(ScoreFdtError):
    """Training loss became non-finite."""

    def __init__(self, message: str, epoch: int | None = None):
        super().__init__(message)
        self.epoch = epoch


class DegenerateDataError(ScoreFdtError):
    """Data statistics unusable (zero variance, singular covariance, ...)."""


class InsufficientDataError(ScoreFdtError):
    """Not enough samples for the requested estimate."""


class CflError(ScoreFdtError):
    """Time step violates the stability bound of the spectral solver."""


class MaxEntError(ScoreFdtError):
    """Base class for maximum-entropy reconstruction failures."""


class InfeasibleMomentsError(MaxEntError):
    """Target moments fail the Hankel positivity check."""


class NonConvergenceError(MaxEntError):
    """No optimizer start reached the moment-matching tolerance."""

    def __init__(self, message: str, best_residual: float | None = None):
        super().__init__(message)
        self.best_residual = best_residual


class ConfigError(ScoreFdtError):
    """Invalid experiment configuration (CLI exit code 2)."""
