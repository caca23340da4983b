"""Pulsed barrier control of a single-flux SQUID model: simulation and analysis."""
from .errors import ConfigError, FitError, FluxPulseError, NumericalError
from .model import (
    PhysicalParams,
    PulseSchedule,
    PulseSpec,
    a_critical,
    ej_at,
    potential_at,
    tau_to_picoseconds,
)
from .solver import Grid, WaveFunction, lowest_eigenpairs, project_lr_basis, relax_ground

__version__ = "0.1.0"
