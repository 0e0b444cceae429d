"""Exception hierarchy shared across the toolkit."""


class TradenetError(Exception):
    """Base class for all toolkit errors."""


class ValidationError(TradenetError, ValueError):
    """Malformed input data or violated structural invariant."""


class IngestError(ValidationError):
    """CSV ingestion failure; message carries file name and line number."""


class EstimationError(TradenetError, RuntimeError):
    """Estimator failed to produce a usable fit."""


class RankDeficiencyError(EstimationError):
    """Design matrix is rank deficient among requested regressors."""

    def __init__(self, columns, message=None):
        self.columns = list(columns)
        super().__init__(
            message or f"collinear regressor columns: {', '.join(self.columns)}"
        )


class SeparationError(EstimationError):
    """Perfect separation in the logit stage; prune regressors and retry."""


class ConvergenceError(EstimationError):
    """Iteration limit reached before meeting the convergence tolerance."""
