"""Exception hierarchy for cavity-memory.

Services raise these; only the CLI layer turns them into exit codes
(see ``cavity_memory.cli.commands``).
"""

from __future__ import annotations


class CavityMemoryError(Exception):
    """Base exception for all simulator errors."""

    pass


class SubsystemError(CavityMemoryError):
    """Unknown subsystem label or parameters that do not match a space."""

    pass


class TruncationError(CavityMemoryError):
    """Fock-space truncation too small for the requested amplitude."""

    def __init__(self, amplitude: float, dim: int, required: int) -> None:
        self.amplitude = amplitude
        self.dim = dim
        self.required = required
        super().__init__(
            f"Truncation guard violated: |alpha|={amplitude:.4g} needs dim >= "
            f"{required}, got {dim}"
        )


class UnphysicalInputError(CavityMemoryError):
    """Inputs that no physical device can produce."""

    pass


class IntegratorError(CavityMemoryError):
    """Master-equation integration failed (step underflow, tolerance)."""

    pass


class TraceDriftError(IntegratorError):
    """Density-matrix trace drifted beyond the allowed bound."""

    pass


class FitError(CavityMemoryError):
    """Fit did not converge or the data cannot constrain the model."""

    pass


class ConfigValidationError(CavityMemoryError):
    """Run configuration rejected by validation.

    Attributes:
        locations: Dotted field paths of every offending entry
    """

    def __init__(self, message: str, locations: list[str] | None = None) -> None:
        self.locations = locations or []
        super().__init__(message)


class UnknownTargetError(CavityMemoryError):
    """Requested reproduction target has no canned configuration."""

    pass
