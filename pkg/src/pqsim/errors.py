"""Exception types shared across the package."""


class ResourceLimitError(RuntimeError):
    """A register or matrix exceeds the size guard of the requested operation."""


class EvolutionError(RuntimeError):
    """Time evolution failed to converge within its substep budget."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class AmbiguityError(ValueError):
    """The requested state is not uniquely defined (e.g. degenerate Fermi level)."""


class UnsupportedConfigurationError(ValueError):
    """A valid-looking request that the estimator cannot serve."""
