"""Exception hierarchy shared by every module."""


class HyperCantorError(Exception):
    """Base class for library errors."""


class ParameterError(HyperCantorError, ValueError):
    """A family parameter or argument is outside its admissible range."""


class DepthCapError(HyperCantorError):
    """A requested depth exceeds the configured cap."""


class BudgetError(HyperCantorError):
    """A table or sweep would exceed the memory budget."""


class ValidationError(HyperCantorError):
    """A contraction system failed validation."""

    def __init__(self, message, report=None):
        super().__init__(message)
        self.report = report


class GapError(HyperCantorError):
    """A point fell into a gap while being coded."""

    def __init__(self, message, level, word):
        super().__init__(message)
        self.level = level
        self.word = word


class InvariantViolation(HyperCantorError):
    """A certified bound or structural identity failed; carries a witness."""

    def __init__(self, message, witness=None):
        super().__init__(message)
        self.witness = witness


class ConfigError(HyperCantorError):
    """Malformed or unknown run configuration."""
