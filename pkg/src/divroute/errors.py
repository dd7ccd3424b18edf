"""Exception types raised across the package."""


class ConfigError(ValueError):
    """Invalid configuration or parameter values."""


class DomainError(ValueError):
    """A query point lies outside the map."""


class ConstructionError(RuntimeError):
    """The roadmap could not be built or is unusable."""


class DegenerateEdgeError(ValueError):
    """An edge has zero length."""


class NoPathError(RuntimeError):
    """The end vertex is unreachable from the start vertex."""


class StepBudgetExceeded(RuntimeError):
    """A vehicle used more steps than the mission allows."""
