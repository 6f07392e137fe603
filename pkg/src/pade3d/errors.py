"""Exception types shared across the package."""


class ParameterError(ValueError):
    """A configuration or deployment parameter is out of range."""


class DomainError(ValueError):
    """A numeric routine was evaluated outside its support."""


class BandError(ValueError):
    """A hop band has no usable width (lower bound >= upper bound)."""
