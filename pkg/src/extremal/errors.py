"""Exception hierarchy shared by all modules.

The CLI maps the three top-level families onto exit codes: configuration
problems exit with 2, data problems with 3 and numerical failures with 4.
"""


class ExtremalError(Exception):
    """Base class for every error raised by this package."""


class ConfigError(ExtremalError, ValueError):
    """Invalid run configuration (unknown key, missing key, bad value)."""


class ParameterError(ConfigError):
    """Model parameters outside their valid domain."""


class DataError(ExtremalError, ValueError):
    """Input data unusable for the requested operation."""


class DomainError(DataError):
    """Argument outside the mathematical domain of an operation."""


class ParseError(DataError):
    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class OrderingError(DataError):
    """Timestamps not strictly increasing."""


class EmptyDataError(DataError):
    pass


class InsufficientDataError(DataError):
    pass


class InsufficientTailDataError(InsufficientDataError):
    """Too few tail observations; ``partial`` holds what could be estimated."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        self.partial = partial


class DegenerateDataError(DataError):
    """Zero-variance or otherwise degenerate input."""


class SupportError(DataError):
    """Observation outside the support of the model distribution."""


class ModelInconsistencyError(DataError):
    """Data that the model cannot have generated for any parameter value."""


class NumericalError(ExtremalError, ArithmeticError):
    pass


class ConvergenceError(NumericalError):
    """Optimizer stopped without converging; ``best`` is the best point found."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class ExplosionError(NumericalError):
    """Simulated path left the representable range."""

    def __init__(self, message, step):
        super().__init__(f"{message} (step {step})")
        self.step = step
