"""Grids, spinor fields, small complex matrices, potentials, and run parameters.

Everything here is shared by all integrators.  Fields live on periodic uniform
grids and store the M interior nodes only; the node at the right endpoint is
identified with node 0 and all stencil access wraps around.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "pauli", "dirac_alpha", "dirac_beta",
    "Grid1D", "Grid2D", "SpinorField", "PotentialSet", "SimParams",
    "sample_potential",
    "BlowUpError", "SolverError", "ConfigError",
]

_SIGMA1 = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
_SIGMA2 = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
_SIGMA3 = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class BlowUpError(RuntimeError):
    """Raised when a time stepper produces a blown-up or non-finite field."""

    def __init__(self, step: int, sup: float):
        super().__init__(f"solution blew up at step {step} (sup-norm {sup:.3e})")
        self.step = step
        self.sup = sup


class SolverError(RuntimeError):
    """Raised when a linear solve fails its residual or regularity check."""


class ConfigError(ValueError):
    """Raised for invalid experiment or CLI configuration."""


def pauli(index: int) -> np.ndarray:
    """Return the Pauli matrix sigma_1, sigma_2 or sigma_3."""
    if index == 1:
        return _SIGMA1.copy()
    if index == 2:
        return _SIGMA2.copy()
    if index == 3:
        return _SIGMA3.copy()
    raise ValueError(f"pauli index must be 1, 2 or 3, got {index!r}")


def dirac_alpha(index: int) -> np.ndarray:
    """Return the 4x4 alpha_j matrix (off-diagonal Pauli blocks)."""
    s = pauli(index)
    out = np.zeros((4, 4), dtype=complex)
    out[:2, 2:] = s
    out[2:, :2] = s
    return out


def dirac_beta() -> np.ndarray:
    """Return the 4x4 beta matrix diag(1, 1, -1, -1)."""
    out = np.zeros((4, 4), dtype=complex)
    out[0, 0] = out[1, 1] = 1.0
    out[2, 2] = out[3, 3] = -1.0
    return out


@dataclass(frozen=True)
class Grid1D:
    """Periodic uniform grid on (a, b) with M interior nodes x_j = a + j h."""

    a: float
    b: float
    m: int

    def __post_init__(self):
        if self.m < 2 or self.m % 2 != 0:
            raise ValueError(f"grid point count M must be even and >= 2, got {self.m}")
        if not self.b > self.a:
            raise ValueError("grid requires b > a")

    @property
    def h(self) -> float:
        return (self.b - self.a) / self.m

    @property
    def length(self) -> float:
        return self.b - self.a

    @property
    def x(self) -> np.ndarray:
        """Interior nodes x_0 .. x_{M-1}; x_M == x_0 by periodicity."""
        return self.a + self.h * np.arange(self.m)

    @property
    def freqs(self) -> np.ndarray:
        """Fourier frequencies mu_l = 2 pi l / (b - a), l = -M/2 .. M/2-1."""
        return 2.0 * np.pi * np.arange(-self.m // 2, self.m // 2) / self.length

    @property
    def shape(self) -> tuple:
        return (self.m,)

    @property
    def ndim(self) -> int:
        return 1

    @property
    def cell_volume(self) -> float:
        return self.h

    @classmethod
    def from_h(cls, a: float, b: float, h: float) -> "Grid1D":
        m = (b - a) / h
        m_int = int(round(m))
        if abs(m - m_int) > 1e-9 * max(1.0, abs(m)):
            raise ValueError(f"(b-a)/h = {m} is not an integer")
        return cls(a, b, m_int)


@dataclass(frozen=True)
class Grid2D:
    """Tensor product of two periodic 1D grids (x = axis 0, y = axis 1)."""

    gx: Grid1D
    gy: Grid1D

    @property
    def shape(self) -> tuple:
        return (self.gx.m, self.gy.m)

    @property
    def ndim(self) -> int:
        return 2

    @property
    def h(self) -> tuple:
        return (self.gx.h, self.gy.h)

    @property
    def cell_volume(self) -> float:
        return self.gx.h * self.gy.h

    def meshes(self) -> tuple:
        """Node coordinate arrays X, Y of shape (M1, M2)."""
        return np.meshgrid(self.gx.x, self.gy.x, indexing="ij")

    @classmethod
    def square(cls, a: float, b: float, m: int) -> "Grid2D":
        g = Grid1D(a, b, m)
        return cls(g, g)


class SpinorField:
    """Complex spinor samples on a periodic grid, shape (*grid.shape, ncomp)."""

    __slots__ = ("grid", "values")

    def __init__(self, grid, values: np.ndarray):
        values = np.asarray(values, dtype=complex)
        if values.shape[:-1] != grid.shape:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.shape}")
        self.grid = grid
        self.values = values

    @property
    def ncomp(self) -> int:
        return self.values.shape[-1]

    def copy(self) -> "SpinorField":
        return SpinorField(self.grid, self.values.copy())

    def node(self, *idx: int) -> np.ndarray:
        """Nodal value with periodic index wrapping (U_{-1} = U_{M-1} etc)."""
        wrapped = tuple(i % n for i, n in zip(idx, self.grid.shape))
        return self.values[wrapped]

    @classmethod
    def zeros(cls, grid, ncomp: int = 2) -> "SpinorField":
        return cls(grid, np.zeros(grid.shape + (ncomp,), dtype=complex))

    @classmethod
    def from_components(cls, grid, *fns: Callable) -> "SpinorField":
        """Sample component functions fn(x) (1D) or fn(x, y) (2D) on the nodes."""
        if grid.ndim == 1:
            cols = [np.asarray(fn(grid.x), dtype=complex) for fn in fns]
        else:
            X, Y = grid.meshes()
            cols = [np.asarray(fn(X, Y), dtype=complex) for fn in fns]
        return cls(grid, np.stack(cols, axis=-1))


@dataclass
class PotentialSet:
    """Electric potential V and magnetic components A_j as evaluable fields.

    ``v`` has signature v(t, x) in 1D or v(t, x, y) in 2D and must broadcast
    over node arrays.  ``a`` is a tuple of like callables, or None for zero
    magnetic potential.  Exact time integrals may be supplied through
    ``v_integral`` / ``a_integrals`` with signature f(t0, t1, *coords).
    """

    v: Callable
    a: Optional[tuple] = None
    time_independent: bool = True
    v_integral: Optional[Callable] = None
    a_integrals: Optional[tuple] = None

    @classmethod
    def free(cls) -> "PotentialSet":
        return cls(v=lambda t, *xs: np.zeros_like(xs[0]), a=None, time_independent=True)

    @classmethod
    def constant(cls, v0: float, a0: Sequence[float] = ()) -> "PotentialSet":
        a_fns = tuple((lambda t, *xs, _c=c: np.full_like(np.asarray(xs[0], dtype=float), _c))
                      for c in a0) or None
        return cls(v=lambda t, *xs: np.full_like(np.asarray(xs[0], dtype=float), v0),
                   a=a_fns, time_independent=True)

    @property
    def n_magnetic(self) -> int:
        return 0 if self.a is None else len(self.a)


def sample_potential(pots: PotentialSet, t: float, grid) -> tuple:
    """Evaluate (V_j, [A_{k,j}]) on the interior nodes at time t."""
    if t < 0:
        raise ValueError(f"potential sample time must be >= 0, got {t}")
    coords = (grid.x,) if grid.ndim == 1 else grid.meshes()
    zeros = np.zeros(grid.shape)

    def _eval(fn, name):
        out = np.asarray(fn(t, *coords), dtype=float)
        out = np.broadcast_to(out, grid.shape).copy() if out.shape != grid.shape else out
        if not np.all(np.isfinite(out)):
            bad = np.argwhere(~np.isfinite(out))[0]
            raise ValueError(f"{name} evaluated non-finite at node {tuple(bad)} (t={t})")
        return out

    v = _eval(pots.v, "V")
    a = [_eval(fn, f"A_{k + 1}") for k, fn in enumerate(pots.a)] if pots.a else [zeros] * grid.ndim
    return v, a


@dataclass
class SimParams:
    """One solver run: epsilon, step size, horizon, grid, potentials, data."""

    eps: float
    tau: float
    t_final: float
    grid: object
    potentials: PotentialSet
    initial: SpinorField
    initial_derivative: Optional[tuple] = None  # analytic d/dx of the components

    def __post_init__(self):
        if not 0.0 < self.eps <= 1.0:
            raise ValueError(f"eps must lie in (0, 1], got {self.eps}")
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.tau > self.t_final * (1 + 1e-12):
            raise ValueError("tau must not exceed the final time")
        ratio = self.t_final / self.tau
        if abs(ratio - round(ratio)) > 1e-12 * max(1.0, ratio):
            raise ValueError(f"T/tau = {ratio} is not an integer to 1e-12 relative")

    @property
    def n_steps(self) -> int:
        return int(round(self.t_final / self.tau))
