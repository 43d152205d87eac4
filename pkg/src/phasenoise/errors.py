"""Exception types raised by the simulator."""


class PhaseNoiseError(Exception):
    """Base class for all errors raised by this package."""


class QuadratureError(PhaseNoiseError):
    """Adaptive quadrature failed to reach the requested tolerance."""

    def __init__(self, message, achieved=None):
        super().__init__(message)
        self.achieved = achieved


class IntegrationError(PhaseNoiseError):
    """The ODE integrator stopped before reaching the final time."""

    def __init__(self, message, time=None):
        super().__init__(message)
        self.time = time


class UnsupportedModelError(PhaseNoiseError):
    """The requested operation is undefined for the given bath model."""


class DivergenceError(PhaseNoiseError):
    """A spectral integral diverges for the given spectral density."""


class TruncationError(PhaseNoiseError):
    """The Fock-space cutoff is too small for the requested state."""

    def __init__(self, message, required_cutoff=None):
        super().__init__(message)
        self.required_cutoff = required_cutoff


class DimensionError(PhaseNoiseError):
    """The truncated Hilbert space exceeds the configured size limit."""


class CoherenceUnderflowError(PhaseNoiseError):
    """A coherence is too small for its logarithm to be meaningful."""


class ConfigError(PhaseNoiseError):
    """One or more problems found while validating a scenario config."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("invalid config:\n" + "\n".join(f"  - {p}" for p in self.problems))
