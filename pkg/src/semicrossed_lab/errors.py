"""Exception types raised across the package."""


class LabError(Exception):
    """Base class for all errors raised by semicrossed_lab."""


class InvalidParameter(LabError, ValueError):
    pass


class LabelError(LabError, IndexError):
    """A Fock label lies outside the truncation."""


class NotInAlgebra(LabError, ValueError):
    """An operator is not in the span of the declared algebra basis."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class InvalidAlgebra(LabError, ValueError):
    pass


class InsufficientWindow(LabError, ValueError):
    """The declared window does not determine the requested unknowns."""


class Unsupported(LabError, NotImplementedError):
    pass


class ConfigError(LabError, ValueError):
    """Malformed configuration; ``locator`` points at the offending field."""

    def __init__(self, message, locator=""):
        super().__init__(f"{locator}: {message}" if locator else message)
        self.locator = locator


class UnknownName(ConfigError):
    pass
