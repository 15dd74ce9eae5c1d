"""Per-mode Dirac operator algebra.

For each Fourier frequency the stiff part of the equation reduces to a small
Hermitian matrix Gamma = eps*mu.sigma + sigma_3 (2x2 in 1D/2D, 4x4 in 3D)
with eigenvalues +-delta, delta = sqrt(1 + eps^2 |mu|^2).  Everything the
spectral integrators need is derived from its eigendecomposition: the unitary
flow exp(-i t Gamma / eps^2), the Gautschi-type filter matrices of the
exponential integrator, and the exact free-flight solution.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .core import SpinorField, dirac_alpha, dirac_beta, pauli
from .spectral import from_modes, to_modes

__all__ = [
    "ModeOperator", "PhaseDecomp",
    "mode_operator_1d", "mode_operator_2d", "mode_operator_3d",
    "mode_flow", "ewi_filters", "dispersion_omega", "exact_free_solution",
    "phase_decomp", "phase_matrix_2c",
    "mode_table_1d", "mode_table_2d", "flow_from_table", "filters_from_table",
]

_SERIES_CUTOFF = 1e-2


@dataclass
class ModeOperator:
    """Eigendata bundle Gamma = Q diag(d) Q* for one Fourier mode."""

    gamma: np.ndarray
    q: np.ndarray
    d: np.ndarray        # real eigenvalues, entries +-delta
    delta: float
    eps: float
    mu: tuple


@dataclass
class PhaseDecomp:
    """Unitary diagonalization P diag(lam) P* of an integrated potential matrix."""

    p: np.ndarray
    lam: np.ndarray
    source: np.ndarray


def _check_eps(eps: float):
    if not 0.0 < eps <= 1.0:
        raise ValueError(f"eps must lie in (0, 1], got {eps}")


def _schur_2c(eps: float, mu1, mu2):
    """Vectorized 2x2 eigendata for off-diagonal eps*(mu1 -+ i mu2)."""
    mu1 = np.asarray(mu1, dtype=float)
    mu2 = np.asarray(mu2, dtype=float)
    w = eps * (mu1 + 1j * mu2)                      # lower-left entry of Gamma
    delta = np.sqrt(1.0 + np.abs(w) ** 2)
    s = np.sqrt(2.0 * delta * (1.0 + delta))
    q = np.empty(delta.shape + (2, 2), dtype=complex)
    q[..., 0, 0] = (1.0 + delta) / s
    q[..., 0, 1] = -np.conj(w) / s
    q[..., 1, 0] = w / s
    q[..., 1, 1] = (1.0 + delta) / s
    return q, delta, w


def _gamma_2c(w, delta):
    g = np.empty(np.shape(delta) + (2, 2), dtype=complex)
    g[..., 0, 0] = 1.0
    g[..., 0, 1] = np.conj(w)
    g[..., 1, 0] = w
    g[..., 1, 1] = -1.0
    return g


def mode_operator_1d(eps: float, mu: float) -> ModeOperator:
    """Eigendata of Gamma = eps*mu*sigma_1 + sigma_3."""
    _check_eps(eps)
    q, delta, w = _schur_2c(eps, mu, 0.0)
    return ModeOperator(_gamma_2c(w, delta), q, np.array([delta, -delta]),
                        float(delta), eps, (mu,))


def mode_operator_2d(eps: float, mu1: float, mu2: float) -> ModeOperator:
    """Eigendata of Gamma = eps*(mu1*sigma_1 + mu2*sigma_2) + sigma_3."""
    _check_eps(eps)
    q, delta, w = _schur_2c(eps, mu1, mu2)
    return ModeOperator(_gamma_2c(w, delta), q, np.array([delta, -delta]),
                        float(delta), eps, (mu1, mu2))


def mode_operator_3d(eps: float, mu1: float, mu2: float, mu3: float) -> ModeOperator:
    """Eigendata of the 4x4 Gamma = eps*sum(mu_j alpha_j) + beta."""
    _check_eps(eps)
    delta = float(np.sqrt(1.0 + eps ** 2 * (mu1 ** 2 + mu2 ** 2 + mu3 ** 2)))
    gamma = eps * (mu1 * dirac_alpha(1) + mu2 * dirac_alpha(2) + mu3 * dirac_alpha(3)) \
        + dirac_beta()
    p, m3 = eps * (mu1 + 1j * mu2), eps * mu3
    dp = 1.0 + delta
    v1 = [dp, 0.0, m3, p]
    v2 = [0.0, dp, np.conj(p), -m3]
    v3 = [-m3, -p, dp, 0.0]
    v4 = [-np.conj(p), m3, 0.0, dp]
    q = np.array([v1, v2, v3, v4], dtype=complex).T / np.sqrt(2.0 * delta * dp)
    d = np.array([delta, delta, -delta, -delta])
    return ModeOperator(gamma, q, d, delta, eps, (mu1, mu2, mu3))


def mode_flow(op: ModeOperator, t: float) -> np.ndarray:
    """Unitary flow Q exp(-i t D / eps^2) Q* of one mode."""
    phases = np.exp(-1j * t * op.d / op.eps ** 2)
    return (op.q * phases) @ op.q.conj().T


def _phi_over_factorial(theta: np.ndarray, shift: int) -> np.ndarray:
    """sum_m (-i theta)^m / (m + shift)! with a series branch for small theta.

    shift=1 gives (1 - e^{-i theta}) / (i theta); shift=2 gives
    (1 - e^{-i theta} - i theta) / theta^2.  Both stay O(1) for all real
    theta, which keeps the filter assembly conditioned as eps -> 0.
    """
    theta = np.asarray(theta, dtype=float)
    z = -1j * theta
    small = np.abs(theta) < _SERIES_CUTOFF
    series = np.ones_like(z) / math.factorial(shift)
    zk = np.ones_like(z)
    for m in range(1, 8):
        zk = zk * z
        series = series + zk / math.factorial(m + shift)
    denom = np.where(small, 1.0, theta)
    if shift == 1:
        closed = (1.0 - np.exp(z)) / (1j * denom)
    else:
        closed = (1.0 - np.exp(z) - 1j * theta) / denom ** 2
    return np.where(small, series, closed)


def _filter_scalars(delta, eps: float, tau: float):
    """Per-eigenvalue filter factors (q1_plus, q1_minus, q2_plus, q2_minus)."""
    theta = tau * np.asarray(delta, dtype=float) / eps ** 2
    q1p = tau * _phi_over_factorial(theta, 1)
    q1m = tau * _phi_over_factorial(-theta, 1)
    q2p = tau ** 2 * _phi_over_factorial(theta, 2)
    q2m = tau ** 2 * _phi_over_factorial(-theta, 2)
    return q1p, q1m, q2p, q2m


def ewi_filters(op: ModeOperator, tau: float) -> tuple:
    """Gautschi filter matrices (Q1, Q2) of one mode.

    Q1 = -i eps^2 Gamma^{-1} (I - e^{-i tau Gamma/eps^2}) and Q2 is its
    first-moment companion; both are assembled as scalar functions of the
    eigenvalues so that Gamma^{-1} = Gamma / delta^2 is applied exactly.
    """
    if tau <= 0:
        raise ValueError("tau must be positive")
    q1p, q1m, q2p, q2m = _filter_scalars(op.delta, op.eps, tau)
    sgn_pos = op.d > 0
    d1 = np.where(sgn_pos, q1p, q1m)
    d2 = np.where(sgn_pos, q2p, q2m)
    f1 = (op.q * d1) @ op.q.conj().T
    f2 = (op.q * d2) @ op.q.conj().T
    return f1, f2


def dispersion_omega(eps: float, v0: float, a0, k, branch: int) -> float:
    """Plane-wave time frequency omega = V0 +- sqrt(1 + eps^2 |k - eps A0|^2)/eps^2."""
    _check_eps(eps)
    a0 = np.atleast_1d(np.asarray(a0, dtype=float))
    k = np.atleast_1d(np.asarray(k, dtype=float))
    shifted = k - eps * a0
    root = np.sqrt(1.0 + eps ** 2 * float(shifted @ shifted))
    return v0 + (1 if branch >= 0 else -1) * root / eps ** 2


def mode_table_1d(grid, eps: float):
    """Eigendata arrays (q: (M,2,2), delta: (M,)) for every grid frequency."""
    _check_eps(eps)
    q, delta, _ = _schur_2c(eps, grid.freqs, np.zeros_like(grid.freqs))
    return q, delta


def mode_table_2d(grid, eps: float):
    """Eigendata arrays (q: (M1,M2,2,2), delta: (M1,M2)) on a tensor grid."""
    _check_eps(eps)
    mu1 = grid.gx.freqs[:, None]
    mu2 = grid.gy.freqs[None, :]
    q, delta, _ = _schur_2c(eps, np.broadcast_to(mu1, grid.shape),
                            np.broadcast_to(mu2, grid.shape))
    return q, delta


def flow_from_table(q: np.ndarray, delta: np.ndarray, eps: float, t: float) -> np.ndarray:
    """Per-mode unitary flows exp(-i t Gamma / eps^2) as (..., 2, 2) array."""
    ph = np.exp(-1j * t * delta / eps ** 2)
    phases = np.stack([ph, np.conj(ph)], axis=-1)
    return np.einsum("...ak,...k,...bk->...ab", q, phases, q.conj())


def filters_from_table(q: np.ndarray, delta: np.ndarray, eps: float, tau: float):
    """Per-mode filter matrices (Q1, Q2) as (..., 2, 2) arrays."""
    q1p, q1m, q2p, q2m = _filter_scalars(delta, eps, tau)
    d1 = np.stack([q1p, q1m], axis=-1)
    d2 = np.stack([q2p, q2m], axis=-1)
    f1 = np.einsum("...ak,...k,...bk->...ab", q, d1, q.conj())
    f2 = np.einsum("...ak,...k,...bk->...ab", q, d2, q.conj())
    return f1, f2


def exact_free_solution(initial: SpinorField, eps: float, t: float) -> SpinorField:
    """Zero-potential solution: each mode evolved by its exact unitary flow."""
    _check_eps(eps)
    grid = initial.grid
    if initial.ncomp != 2:
        raise ValueError("free flight is implemented for two-component fields")
    if grid.ndim == 1:
        q, delta = mode_table_1d(grid, eps)
    else:
        q, delta = mode_table_2d(grid, eps)
    flows = flow_from_table(q, delta, eps, t)
    modes = to_modes(initial.values, grid.ndim)
    out = np.einsum("...ab,...b->...a", flows, modes)
    return SpinorField(grid, from_modes(out, grid.ndim))


def phase_decomp(v1: float, a1vec) -> PhaseDecomp:
    """Diagonalize V.I - sum_k A_k sigma_k (2x2 for d<=2, 4x4 alphas for d=3).

    The eigenvalue ordering is ascending (V - |A| first); the defining
    property P diag(lam) P* = source is what callers may rely on.
    """
    a1vec = np.atleast_1d(np.asarray(a1vec, dtype=float))
    d = a1vec.size
    if d not in (1, 2, 3):
        raise ValueError(f"magnetic vector length must be 1, 2 or 3, got {d}")
    if d < 3:
        source = v1 * np.eye(2, dtype=complex)
        for k in range(d):
            source -= a1vec[k] * pauli(k + 1)
    else:
        source = v1 * np.eye(4, dtype=complex)
        for k in range(3):
            source -= a1vec[k] * dirac_alpha(k + 1)
    if np.all(a1vec == 0.0):
        n = source.shape[0]
        return PhaseDecomp(np.eye(n, dtype=complex), np.full(n, v1), source)
    lam, p = np.linalg.eigh(source)
    return PhaseDecomp(p, lam, source)


def phase_matrix_2c(v1: np.ndarray, a1: np.ndarray, a2=None) -> np.ndarray:
    """Nodal rotation exp(-i (V.I - A.sigma)) closed form, vectorized.

    With B = A1 sigma_1 (+ A2 sigma_2) one has B^2 = |A|^2 I, so the
    exponential is e^{-iV} (cos|A| I + i sin|A| B/|A|).
    """
    v1 = np.asarray(v1, dtype=float)
    a1 = np.asarray(a1, dtype=float)
    w = a1 + 1j * (np.asarray(a2, dtype=float) if a2 is not None else 0.0)
    lam = np.abs(w)
    ev = np.exp(-1j * v1)
    c = np.cos(lam)
    snc = np.sinc(lam / np.pi)          # sin|A| / |A|, smooth at zero
    out = np.zeros(np.broadcast(v1, lam).shape + (2, 2), dtype=complex)
    out[..., 0, 0] = ev * c
    out[..., 1, 1] = ev * c
    out[..., 0, 1] = 1j * ev * snc * np.conj(w)
    out[..., 1, 0] = 1j * ev * snc * w
    return out
