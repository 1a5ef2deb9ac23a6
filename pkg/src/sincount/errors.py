"""Exception types shared across the package."""


class SincountError(Exception):
    """Base class for all package errors."""


class ValidationError(SincountError):
    """Invalid user input (bad scenario, out-of-band frequency, bad config)."""


class NumericDomainError(SincountError):
    """A numeric kernel left its valid domain (non-PD matrix, bad index)."""

    def __init__(self, message, index=None):
        super().__init__(message)
        self.index = index


class DegenerateStatsError(SincountError):
    """Sufficient statistics are numerically singular."""

    def __init__(self, message, pair=None):
        super().__init__(message)
        self.pair = pair


class QuadratureError(SincountError):
    """Quadrature failed to reach the requested tolerance."""

    def __init__(self, message, estimate=None, achieved_error=None):
        super().__init__(message)
        self.estimate = estimate
        self.achieved_error = achieved_error


class ModelViolationError(SincountError):
    """A modeling assumption (e.g. signal orthogonality) fails its check."""


class SelectionError(SincountError):
    """Order selection failed; carries partial diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics
