class DomainError(ValueError):
    """Argument outside the domain of an operation."""


class UnsupportedWeightError(ValueError):
    """The weight does not satisfy a condition the operation needs."""


class NumericError(ArithmeticError):
    """Quadrature or eigensolver failure."""


class ConfigError(ValueError):
    """Bad experiment configuration (unknown ids, malformed grids, paths)."""
