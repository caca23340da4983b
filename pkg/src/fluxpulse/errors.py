"""Exception hierarchy. The CLI maps each class to an exit code."""


class FluxPulseError(Exception):
    """Base class for errors raised by fluxpulse."""


class ConfigError(FluxPulseError, ValueError):
    """Invalid or unreadable experiment configuration."""


class NumericalError(FluxPulseError, RuntimeError):
    """Non-convergence or loss of norm during integration."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class FitError(FluxPulseError, ValueError):
    """Envelope fit is underdetermined or its input is degenerate."""
