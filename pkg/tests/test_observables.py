import numpy as np
import pytest

from dirac_lab.core import Grid1D, PotentialSet, SimParams, SpinorField
from dirac_lab.dirac_ops import exact_free_solution, mode_operator_1d
from dirac_lab.expint import Tsfp1d
from dirac_lab.harness import build_params
from dirac_lab.observables import density_current, energy_continuous, mass
from dirac_lab.spectral import analyze, spectral_derivative


def test_mass_zero_field():
    g = Grid1D(-16.0, 16.0, 32)
    assert mass(SpinorField.zeros(g)) == 0.0


def test_mass_constant_field():
    g = Grid1D(-16.0, 16.0, 64)
    f = SpinorField(g, np.ones((64, 2), complex))
    assert np.isclose(mass(f), 64.0)


def test_mass_parseval_tie():
    rng = np.random.default_rng(0)
    g = Grid1D(-16.0, 16.0, 64)
    f = SpinorField(g, rng.standard_normal((64, 2)) + 1j * rng.standard_normal((64, 2)))
    coeffs = analyze(f).coeffs
    assert np.isclose(mass(f), g.length * np.sum(np.abs(coeffs) ** 2), rtol=1e-12)


def test_density_current_nodewise():
    g = Grid1D(0.0, 2.0, 4)
    vals = np.zeros((4, 2), complex)
    vals[:, 0] = 1.0
    rho, rho_j, cur = density_current(SpinorField(g, vals), 0.5)
    assert np.allclose(rho, 1.0)
    assert np.allclose(cur, 0.0)
    vals[:, :] = 1.0 / np.sqrt(2.0)
    rho, rho_j, cur = density_current(SpinorField(g, vals), 0.5)
    assert np.allclose(rho, 1.0)
    assert np.allclose(cur[:, 0], 2.0)  # Phi* s1 Phi / eps = 1 / 0.5


def test_density_decomposition():
    rng = np.random.default_rng(1)
    g = Grid1D(0.0, 1.0, 8)
    f = SpinorField(g, rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2)))
    rho, rho_j, _ = density_current(f, 1.0)
    assert np.all(rho_j >= 0)
    assert np.abs(rho_j.sum(axis=-1) - rho).max() < 1e-12


def test_continuity_residual_free_waves():
    # centered time difference of rho plus spectral divergence of J
    g = Grid1D(-1.0, 1.0, 32)
    eps, dt = 1.0, 3e-5
    init = SpinorField.from_components(
        g, lambda x: np.exp(1j * np.pi * (x + 1)),
        lambda x: 0.4 * np.exp(2j * np.pi * (x + 1)))
    t0 = 0.33
    fm = exact_free_solution(init, eps, t0 - dt)
    f0 = exact_free_solution(init, eps, t0)
    fp = exact_free_solution(init, eps, t0 + dt)
    rho_m = density_current(fm, eps)[0]
    rho_p = density_current(fp, eps)[0]
    _, _, cur = density_current(f0, eps)
    jfield = SpinorField(g, np.stack([cur[:, 0], 0 * cur[:, 0]], axis=-1))
    div_j = spectral_derivative(jfield).values[:, 0].real
    resid = (rho_p - rho_m) / (2 * dt) + div_j
    assert np.abs(resid).max() < 1e-6


def test_energy_zero_field():
    g = Grid1D(-1.0, 1.0, 8)
    assert energy_continuous(SpinorField.zeros(g), PotentialSet.free(), 1.0) == 0.0


def test_energy_single_mode_closed_form():
    # E = (b - a) B* Gamma_mu B / eps^2 for one free mode with amplitude B
    g = Grid1D(-1.0, 1.0, 32)
    eps = 0.5
    slot = 16 + 4
    mu = g.freqs[slot]
    b = np.array([0.7 + 0.2j, -0.3 + 0.5j])
    vals = np.zeros((32, 2), complex)
    vals[:, :] = b[None, :] * np.exp(1j * mu * (g.x - g.a))[:, None]
    e = energy_continuous(SpinorField(g, vals), PotentialSet.free(), eps)
    gamma = mode_operator_1d(eps, mu).gamma
    expect = g.length * np.real(np.conj(b) @ gamma @ b) / eps ** 2
    assert np.isclose(e, expect, rtol=1e-12)


def test_energy_constant_along_free_flight():
    g = Grid1D(-16.0, 16.0, 128)
    init = SpinorField.from_components(
        g, lambda x: np.exp(-x ** 2 / 2),
        lambda x: 0.4 * np.exp(-(x - 1) ** 2 / 2))
    free = SimParams(1.0, 0.05, 1.0, g, PotentialSet.free(), init)
    st = Tsfp1d(free)
    e0 = energy_continuous(st.field, free.potentials, free.eps)
    assert abs(e0) > 0.1
    st.run()
    e1 = energy_continuous(st.field, free.potentials, free.eps)
    assert abs(e1 - e0) < 1e-10 * abs(e0)


def test_energy_rejects_time_dependent():
    g = Grid1D(-1.0, 1.0, 8)
    pots = PotentialSet(v=lambda t, x: t + 0 * x, a=None, time_independent=False)
    with pytest.raises(ValueError):
        energy_continuous(SpinorField.zeros(g), pots, 1.0)


def test_gauge_shift_leaves_density_invariant():
    # adding a constant V0 changes the solution by a pure phase under TSFP
    v0 = 1.7
    p1 = build_params("gaussian-1d", 0.5, 1.0 / 8.0, 0.02, 0.2)
    pots2 = PotentialSet(v=lambda t, x: (1 - x) / (1 + x ** 2) + v0,
                         a=p1.potentials.a, time_independent=True)
    p2 = SimParams(p1.eps, p1.tau, p1.t_final, p1.grid, pots2, p1.initial)
    st1, st2 = Tsfp1d(p1), Tsfp1d(p2)
    for _ in range(p1.n_steps):
        st1.step()
        st2.step()
        rho1 = density_current(st1.field, p1.eps)[0]
        rho2 = density_current(st2.field, p1.eps)[0]
        assert np.abs(rho1 - rho2).max() < 1e-10
