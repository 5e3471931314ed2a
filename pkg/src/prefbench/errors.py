"""Semantic exception hierarchy shared by all prefbench modules."""


class PrefbenchError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(PrefbenchError, ValueError):
    """An argument is outside the mathematical domain of an operation."""


class ConfigurationError(PrefbenchError, ValueError):
    """An object or config is internally inconsistent or names an unknown variant."""


class StateError(PrefbenchError, RuntimeError):
    """An operation is not permitted in the object's current state."""


class TrainingError(PrefbenchError, RuntimeError):
    """Training aborted; carries the epoch at which the failure occurred."""

    def __init__(self, message: str, epoch: int):
        super().__init__(f"{message} (epoch {epoch})")
        self.epoch = epoch


class DiagnosticError(PrefbenchError, ValueError):
    """A diagnostic fit could not be produced; carries the offending curve."""

    def __init__(self, message: str, curve=None):
        super().__init__(message)
        self.curve = curve
