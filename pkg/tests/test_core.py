import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from dirac_lab.core import (Grid1D, Grid2D, PotentialSet,
                            SimParams, SpinorField, dirac_alpha, dirac_beta,
                            pauli, sample_potential)


def test_pauli_values():
    assert np.array_equal(pauli(1), [[0, 1], [1, 0]])
    assert np.array_equal(pauli(3), [[1, 0], [0, -1]])
    assert np.allclose(pauli(2), [[0, -1j], [1j, 0]])


def test_pauli_squares_to_identity():
    for k in (1, 2, 3):
        assert np.array_equal(pauli(k) @ pauli(k), np.eye(2))


def test_pauli_commutator():
    lhs = pauli(1) @ pauli(2) - pauli(2) @ pauli(1)
    assert np.abs(lhs - 2j * pauli(3)).max() < 1e-15


@pytest.mark.parametrize("bad", [0, 4, -1])
def test_pauli_bad_index(bad):
    with pytest.raises(ValueError):
        pauli(bad)
    with pytest.raises(ValueError):
        dirac_alpha(bad)


def test_dirac_beta_diagonal():
    assert np.array_equal(dirac_beta(), np.diag([1.0, 1.0, -1.0, -1.0]).astype(complex))


def test_alpha_squares_and_anticommutators():
    beta = dirac_beta()
    mats = [dirac_alpha(k) for k in (1, 2, 3)] + [beta]
    for a in mats:
        assert np.abs(a @ a - np.eye(4)).max() < 1e-15
        assert np.abs(a - a.conj().T).max() < 1e-15
    for i in range(4):
        for j in range(i + 1, 4):
            anti = mats[i] @ mats[j] + mats[j] @ mats[i]
            assert np.abs(anti).max() < 1e-15


def test_sigma_anticommutators():
    for i in (1, 2, 3):
        for j in (1, 2, 3):
            anti = pauli(i) @ pauli(j) + pauli(j) @ pauli(i)
            expect = 2.0 * np.eye(2) if i == j else np.zeros((2, 2))
            assert np.abs(anti - expect).max() < 1e-15


def test_grid_requires_even_m():
    with pytest.raises(ValueError):
        Grid1D(-1.0, 1.0, 5)
    with pytest.raises(ValueError):
        Grid1D(-1.0, 1.0, 0)
    with pytest.raises(ValueError):
        Grid1D(1.0, -1.0, 8)


def test_grid_geometry():
    g = Grid1D(-16.0, 16.0, 64)
    assert g.h == 0.5
    assert g.x[0] == -16.0
    assert np.isclose(g.x[-1] + g.h, 16.0)
    assert g.freqs[0] == -np.pi * 2 * 32 / 32.0
    # basis periodicity: exp(i mu_l (b - a)) = 1 for all l
    assert np.abs(np.exp(1j * g.freqs * g.length) - 1.0).max() < 1e-12


def test_grid_from_h_rejects_non_integer():
    with pytest.raises(ValueError):
        Grid1D.from_h(-1.0, 1.0, 0.3)


def test_grid2d_meshes():
    g = Grid2D.square(-1.0, 1.0, 4)
    X, Y = g.meshes()
    assert X.shape == (4, 4)
    assert X[1, 0] == X[1, 3]  # x varies along axis 0 only
    assert Y[0, 1] == Y[3, 1]


@given(j=st.integers(-20, 20), s=st.integers(-1, 1))
@settings(max_examples=40, deadline=None)
def test_periodic_node_accessor(j, s):
    g = Grid1D(0.0, 1.0, 8)
    f = SpinorField(g, np.arange(16.0).reshape(8, 2) + 0j)
    assert np.array_equal(f.node(j + s), f.node((j + s) % 8))


def test_field_shape_validation():
    g = Grid1D(0.0, 1.0, 8)
    with pytest.raises(ValueError):
        SpinorField(g, np.zeros((7, 2)))


def test_sample_potential_zero():
    g = Grid1D(-16.0, 16.0, 32)
    v, a = sample_potential(PotentialSet.free(), 0.0, g)
    assert np.all(v == 0) and np.all(a[0] == 0)


def test_sample_potential_smooth_value():
    g = Grid1D(-16.0, 16.0, 32)
    pots = PotentialSet(v=lambda t, x: (1 - x) / (1 + x ** 2), a=None)
    v, _ = sample_potential(pots, 0.0, g)
    j0 = np.argmin(np.abs(g.x))
    assert np.isclose(v[j0], 1.0)


def test_sample_potential_honeycomb_origin():
    from dirac_lab.harness import honeycomb_2d_params
    params = honeycomb_2d_params(1.0, 0.5, 0.1, 1.0)
    v, _ = sample_potential(params.potentials, 0.0, params.grid)
    i = np.argmin(np.abs(params.grid.gx.x))
    j = np.argmin(np.abs(params.grid.gy.x))
    assert np.isclose(v[i, j], 3.0)


def test_sample_potential_nonfinite_names_node():
    g = Grid1D(0.0, 2.0, 4)

    def bad(t, x):
        with np.errstate(divide="ignore"):
            return 1.0 / (x - g.x[2])

    with pytest.raises(ValueError, match="node"):
        sample_potential(PotentialSet(v=bad, a=None), 0.0, g)


def _dummy_params(**kw):
    g = Grid1D(-1.0, 1.0, 8)
    init = SpinorField.zeros(g)
    base = dict(eps=1.0, tau=0.1, t_final=1.0, grid=g,
                potentials=PotentialSet.free(), initial=init)
    base.update(kw)
    return SimParams(**base)


def test_simparams_validation():
    _dummy_params()  # valid
    with pytest.raises(ValueError):
        _dummy_params(eps=0.0)
    with pytest.raises(ValueError):
        _dummy_params(eps=1.5)
    with pytest.raises(ValueError):
        _dummy_params(tau=2.0)
    with pytest.raises(ValueError):
        _dummy_params(tau=0.3)  # T/tau not an integer
    p = _dummy_params(tau=0.25)
    assert p.n_steps == 4


def test_constant_potentialset():
    g = Grid1D(0.0, 1.0, 4)
    pots = PotentialSet.constant(2.0, (0.5,))
    v, a = sample_potential(pots, 0.3, g)
    assert np.all(v == 2.0) and np.all(a[0] == 0.5)
