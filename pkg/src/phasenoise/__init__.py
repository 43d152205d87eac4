"""Exact and time-local dynamics of pure phase noise from a bosonic bath."""

from .baths import (
    BathMode,
    DiscreteBath,
    OhmicExpCutoff,
    SpectralBath,
    TabulatedDensity,
    dephasing_functionals,
    discretize,
)
from .errors import (
    ConfigError,
    PhaseNoiseError,
    UnsupportedModelError,
)
from .exact import (
    CoherenceTrajectory,
    CoherentMixture,
    Gaussian,
    SystemSpec,
    propagate_exact_charfn,
    propagate_exact_gaussian,
    to_schrodinger,
)
from .tcl import integrate_bloch_redfield, integrate_tcl2, markov_rates

__version__ = "0.1.0"
