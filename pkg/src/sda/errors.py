"""Exception hierarchy shared by the trainers, data loaders and CLI."""


class SDAError(Exception):
    """Base class for all package errors."""


class ConfigError(SDAError, ValueError):
    pass


class DimensionError(SDAError, ValueError):
    pass


class ValidationError(SDAError, ValueError):
    pass


class DataError(SDAError, ValueError):
    pass


class DegenerateError(SDAError, ValueError):
    """A conditional update is undefined (zero variance, all-zero latents, ...)."""


class DivergedError(SDAError, FloatingPointError):
    """Training produced a non-finite loss or parameter."""

    def __init__(self, epoch, message="non-finite value encountered"):
        self.epoch = epoch
        super().__init__(f"diverged at epoch {epoch}: {message}")
