"""Exception types raised across the package."""


class ShapeError(ValueError):
    """Operand shapes are incompatible."""


class ParameterError(ValueError):
    """A scalar parameter lies outside its admissible range."""


class RangeError(IndexError):
    """Requested rows fall outside the basis."""


class NumericError(ArithmeticError):
    """A non-finite value appeared where a finite one is required."""


class DivergenceError(NumericError):
    """Training produced a non-finite loss.

    Attributes
    ----------
    epoch, batch : int
        Zero-based location of the first non-finite loss.
    """

    def __init__(self, message, epoch=None, batch=None):
        super().__init__(message)
        self.epoch = epoch
        self.batch = batch


class UndefinedMetricError(ValueError):
    """A metric has a zero denominator (e.g. an all-zero reference channel)."""


class ConfigError(ValueError):
    """Bad experiment configuration."""

    def __init__(self, message, field=None):
        super().__init__(message if field is None else f"{field}: {message}")
        self.field = field


class IngestionError(OSError):
    """An input file is missing or cannot be parsed."""
