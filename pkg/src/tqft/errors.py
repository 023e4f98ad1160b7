"""Exception types shared across the package.

The CLI maps these onto process exit codes: configuration problems -> 2,
register-capacity problems -> 3, numerical failures -> 4.
"""


class ConfigError(ValueError):
    """Malformed or invalid experiment configuration."""


class ValidationError(ConfigError):
    """A model parameter violates one of its documented invariants."""


class CapacityError(RuntimeError):
    """Requested register exceeds the dense-simulation cap."""


class DimensionMismatchError(ValueError):
    """Operands live on registers of different sizes."""


class UnsupportedModelError(ValueError):
    """The operation does not apply to the given model or Hamiltonian."""


class NumericalFailureError(RuntimeError):
    """A numerical routine left its validity envelope."""


class StepFailureError(NumericalFailureError):
    """A fitted evolution step could not be solved; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class DivergenceError(NumericalFailureError):
    """An analytic reference was evaluated at a divergent argument."""
