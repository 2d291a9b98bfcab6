"""Exception hierarchy shared across the package."""


class ValidationError(ValueError):
    """Raised when an input violates a documented precondition."""


class NumericalError(RuntimeError):
    """Raised when a numerical routine fails (SVD breakdown, divergence)."""


class RankDeficiencyError(NumericalError):
    """Raised when a matrix that must be invertible is numerically singular."""


class Category1DependenceError(RankDeficiencyError):
    """Raised by the block decomposition when the added regressors are
    linearly dependent on the canonical ones.

    This is a detection signal, not a bug: the extension adds no flexibility
    (category-1 overparameterization), so the caller should compare the
    models through :func:`deltauq.uncertainty.category1_equivalence` instead.
    """


class RegressorCompatibilityError(ValidationError):
    """Raised when a claimed parameter transform does not actually map the
    overparameterized regressor onto the canonical one. Carries the worst
    offending input in args for diagnosis."""

    def __init__(self, message, worst_input=None, worst_error=None):
        super().__init__(message)
        self.worst_input = worst_input
        self.worst_error = worst_error


class ConsistencyError(NumericalError):
    """Raised when an internal cross-check identity is violated beyond
    tolerance, signalling corruption upstream rather than bad user input."""
