"""Pseudospectral simulation of a nonlocal free-surface wave equation.

Modules
-------
spectral     periodic grid, Fourier operators, norms, extremal slope
mollifier    bump-function mollification in two realisations
dynamics     right-hand sides, third-order residual, slope forcing
integrator   RK4 time stepping with stop monitors
breaking     breaking constants, slope trace, Riccati envelope, characteristics
harness      configs, initial data, persistence, studies
"""
from .spectral import GridSpec, RealField, SpectralField
from .integrator import SolverConfig, State, StopReason, RunRecord, integrate
from .dynamics import RhsVariant
from .mollifier import MollifierSpec

__version__ = "0.1.0"

__all__ = [
    "GridSpec",
    "RealField",
    "SpectralField",
    "SolverConfig",
    "State",
    "StopReason",
    "RunRecord",
    "integrate",
    "RhsVariant",
    "MollifierSpec",
]
