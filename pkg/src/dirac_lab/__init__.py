"""dirac-lab: solvers and benchmarks for the dimensionless periodic Dirac equation."""

__version__ = "0.1.0"

from .core import (
    BlowUpError, ConfigError, Grid1D, Grid2D, PotentialSet, SimParams,
    SolverError, SpinorField, dirac_alpha, dirac_beta, pauli, sample_potential,
)
from .dirac_ops import (
    ModeOperator, PhaseDecomp, dispersion_omega, ewi_filters,
    exact_free_solution, mode_flow, mode_operator_1d, mode_operator_2d,
    mode_operator_3d, phase_decomp,
)
from .expint import EwiFp, Tsfp1d, Tsfp2d
from .fdtd import Cnfd, Lffd, Sifd1, Sifd2, stability_bound
from .observables import density_current, energy_continuous, mass
from .spectral import ModeCoeffs, analyze, spectral_derivative, synthesize

__all__ = [
    "__version__",
    "BlowUpError", "ConfigError", "SolverError",
    "Grid1D", "Grid2D", "SpinorField", "PotentialSet", "SimParams",
    "pauli", "dirac_alpha", "dirac_beta", "sample_potential",
    "ModeCoeffs", "analyze", "synthesize", "spectral_derivative",
    "ModeOperator", "PhaseDecomp", "mode_operator_1d", "mode_operator_2d",
    "mode_operator_3d", "mode_flow", "ewi_filters", "dispersion_omega",
    "exact_free_solution", "phase_decomp",
    "Lffd", "Sifd1", "Sifd2", "Cnfd", "EwiFp", "Tsfp1d", "Tsfp2d",
    "stability_bound", "mass", "density_current", "energy_continuous",
]
