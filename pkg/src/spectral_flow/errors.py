"""Exception types shared across the package.

Each class subclasses the closest builtin so callers that only know about
``ValueError`` / ``IndexError`` still catch them.
"""


class SpectralFlowError(Exception):
    """Base class for all package errors."""


class InvalidArgumentError(SpectralFlowError, ValueError):
    pass


class DomainError(SpectralFlowError, ValueError):
    """Evaluation point outside ``[-v_c, v_c]``."""


class ModeIndexError(SpectralFlowError, IndexError):
    """Mode index outside ``0..n_max``."""


class ShapeError(SpectralFlowError, ValueError):
    pass


class StabilityError(SpectralFlowError, ValueError):
    """Time step too large for the explicit integrator."""


class DivergenceError(SpectralFlowError, ArithmeticError):
    """A non-finite state was produced during time stepping."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = time


class InsufficientDataError(SpectralFlowError, ValueError):
    pass


class RegimeError(SpectralFlowError, ValueError):
    """Requested parameters fall outside the resolvable regime of the data."""


class UndefinedError(SpectralFlowError, ValueError):
    """Quantity is mathematically undefined for the given input."""


class ConfigError(SpectralFlowError, ValueError):
    def __init__(self, message: str, key: str | None = None):
        super().__init__(message if key is None else f"{key}: {message}")
        self.key = key
