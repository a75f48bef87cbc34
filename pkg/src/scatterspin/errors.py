"""Exception hierarchy shared across the package.

The CLI maps these onto its exit-code contract: configuration problems
exit 2, validation problems exit 3, internal-consistency failures exit 4.
"""


class ScatterSpinError(Exception):
    """Base class for all package errors."""


class ValidationError(ScatterSpinError, ValueError):
    """Invalid physical input (negative rate, shape mismatch, NaN, ...)."""


class ResonanceError(ValidationError):
    """Beatnote frequency exactly resonant with a motional mode."""


class ModelViolationError(ValidationError):
    """Rates incompatible with the requested model (e.g. scattering from
    the dark qubit level in the spin-echo treatment)."""


class SizeError(ValidationError):
    """Hilbert-space dimension beyond what a dense method supports."""


class ConsistencyError(ScatterSpinError, RuntimeError):
    """An internal cross-check failed (imaginary residue, trace drift...)."""


class StepSizeError(ConsistencyError):
    """Integrator step size too coarse for the requested accuracy."""

    def __init__(self, message: str, suggested_dt: float | None = None):
        super().__init__(message)
        self.suggested_dt = suggested_dt


class ConfigError(ScatterSpinError):
    """Malformed or contradictory run configuration."""
