"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of a function."""


class ModelError(ValueError):
    """A covariance model is invalid (e.g. not positive semidefinite)."""


class SingularModelError(ModelError):
    """A formula is singular for the given model (e.g. k''(0) = 0)."""


class ConfigError(ValueError):
    """An experiment or sampler configuration is inconsistent."""


class ResolutionAbort(RuntimeError):
    """Too many grid cells were flagged as under-resolved."""
