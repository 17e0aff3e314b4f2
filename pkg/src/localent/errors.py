"""Exception types shared across the package."""


class LocalEntError(Exception):
    """Base class for package errors."""


class DomainError(LocalEntError, ValueError):
    """Evaluation requested inside a declared singular zone (e.g. r = 0)."""


class UnsupportedOrderError(LocalEntError, ValueError):
    """A derivative order outside the state's supported range."""


class QuadratureError(LocalEntError, RuntimeError):
    """Numerical integration failed to converge to the requested tolerance."""


class ConvergenceError(LocalEntError, RuntimeError):
    """Successive numerical estimates failed to agree (e.g. finite differences)."""


class ValidationError(LocalEntError, ValueError):
    """Invalid argument combination (dimensions, signs, ranges)."""


class ConfigError(LocalEntError, ValueError):
    """A run configuration document failed validation.

    `field` carries a dotted path into the JSON document for diagnostics.
    """

    def __init__(self, field, message):
        self.field = field
        super().__init__(f"{field}: {message}")
