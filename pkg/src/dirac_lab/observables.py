"""Physical diagnostics: mass, densities, currents, and the continuous energy."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .core import SolverError, SpinorField, dirac_alpha, pauli, sample_potential
from .spectral import spectral_derivative

__all__ = ["ObservableReport", "mass", "density_current", "energy_continuous"]


@dataclass
class ObservableReport:
    """Diagnostics of one field snapshot; arrays are omitted when not sampled."""

    t: float
    mass: float
    energy: Optional[float] = None
    density: Optional[np.ndarray] = None           # total rho per node
    component_density: Optional[np.ndarray] = None
    current: Optional[np.ndarray] = None           # shape (*grid, d)


def mass(field: SpinorField) -> float:
    """Discrete l2 mass h * sum_j |Phi_j|^2 (tensor cell volume in 2D)."""
    return float(field.grid.cell_volume * np.sum(np.abs(field.values) ** 2))


def density_current(field: SpinorField, eps: float) -> tuple:
    """Nodal densities (rho, rho_j) and current J = Phi* m_j Phi / eps.

    The current matrices are the Pauli sigmas for two-component fields and the
    4x4 alphas for four-component ones.
    """
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    u = field.values
    rho_j = np.abs(u) ** 2
    rho = rho_j.sum(axis=-1)
    d = field.grid.ndim
    mats = [pauli(k + 1) if field.ncomp == 2 else dirac_alpha(k + 1) for k in range(d)]
    cur = np.stack(
        [np.real(np.einsum("...a,ab,...b->...", np.conj(u), m, u)) / eps for m in mats],
        axis=-1)
    return rho, rho_j, cur


def energy_continuous(field: SpinorField, potentials, eps: float) -> float:
    """Quadrature of the conserved energy functional with spectral derivatives.

    Valid for time-independent potentials only; the vanishing imaginary part
    of the kinetic term is asserted and dropped.
    """
    if not potentials.time_independent:
        raise ValueError("continuous energy is defined for time-independent potentials")
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")
    grid = field.grid
    u = field.values
    v, a = sample_potential(potentials, 0.0, grid)
    sig = [pauli(k + 1) for k in range(grid.ndim)]
    total = 0.0 + 0.0j
    for k in range(grid.ndim):
        du = spectral_derivative(field, axis=k).values
        total += (-1j / eps) * np.sum(np.einsum("...a,ab,...b->...", np.conj(u), sig[k], du))
        total -= np.sum(a[k] * np.einsum("...a,ab,...b->...", np.conj(u), sig[k], u))
    total += np.sum(np.abs(u[..., 0]) ** 2 - np.abs(u[..., 1]) ** 2) / eps ** 2
    total += np.sum(v * np.sum(np.abs(u) ** 2, axis=-1))
    total *= grid.cell_volume
    if abs(total.imag) > 1e-10 * max(1.0, abs(total.real)):
        raise SolverError(f"energy imaginary residue {total.imag:.3e} too large")
    return float(total.real)
