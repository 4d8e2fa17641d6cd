"""Exception types shared across the package."""


class RobustMeanError(Exception):
    """Base class for all package errors."""


class ParameterError(RobustMeanError, ValueError):
    """An argument is outside its admissible range."""


class DomainError(RobustMeanError, ValueError):
    """A numeric input is not finite."""


class CapacityError(ParameterError):
    """Exact subset enumeration would exceed the configured cap."""


class ConsistencyError(RobustMeanError, ValueError):
    """Two inputs disagree, e.g. a block index beyond the sample length."""


class NumericError(RobustMeanError, ArithmeticError):
    """A numerical routine could not produce a finite answer."""


class ConfigError(ParameterError):
    """A study or CLI configuration is invalid; ``keys`` names the offenders."""

    def __init__(self, message, keys=()):
        super().__init__(message)
        self.keys = list(keys)
