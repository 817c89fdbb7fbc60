"""Exception types shared across the package."""


class BasketFDError(Exception):
    """Base class for all package errors."""


class ValidationError(BasketFDError, ValueError):
    """A parameter or input violates a documented precondition."""


class ConfigError(BasketFDError, ValueError):
    """Inconsistent run configuration (grid spacing, unknown keys, ...)."""


class NumericalError(BasketFDError, RuntimeError):
    """An iterative method failed to converge; carries diagnostics."""

    def __init__(self, message: str, **diagnostics):
        super().__init__(message)
        self.diagnostics = dict(diagnostics)

    def __str__(self) -> str:
        base = super().__str__()
        if not self.diagnostics:
            return base
        extra = ", ".join(f"{k}={v!r}" for k, v in sorted(self.diagnostics.items()))
        return f"{base} ({extra})"
