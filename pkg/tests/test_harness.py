import json

import numpy as np
import pytest

from dirac_lab.core import ConfigError, Grid1D, SpinorField
from dirac_lab.harness import (ConvergenceRecord, ExperimentSpec, attach_orders,
                               build_params, chirp_field, error_norm,
                               estimate_potential_maxima, fdtd_delta_rule,
                               fdtd_temporal_cells, free_dirac_cnfd_error,
                               observable_error_l1, potential_from_config,
                               reference_solution, run_convergence,
                               run_honeycomb_2d, stability_scan,
                               write_records_csv, write_snapshot)
from dirac_lab.observables import mass
from dirac_lab.spectral import to_modes


def _field(m, fill, a=-16.0, b=16.0):
    g = Grid1D(a, b, m)
    return SpinorField(g, np.full((m, 2), fill, dtype=complex))


def test_error_norm_identical_fields():
    f = _field(32, 1.0 + 1.0j)
    assert error_norm(f, f) == 0.0


def test_error_norm_constant_offset():
    f = _field(32, 0.0)
    g = _field(32, 0.0)
    g.values[:, 0] = 0.5
    # sqrt(32 * |c|^2) over the length-32 domain
    assert np.isclose(error_norm(f, g), np.sqrt(32 * 0.25))


def test_error_norm_restricts_finer_reference():
    coarse = _field(16, 1.0)
    fine = _field(64, 1.0)
    fine.values[:, 1] = 2.0
    coarse.values[:, 1] = 2.0
    assert error_norm(coarse, fine) < 1e-14


def test_error_norm_restricts_finer_numeric():
    fine = _field(64, 1.0)
    coarse = _field(16, 1.0)
    assert error_norm(fine, coarse) < 1e-14


def test_error_norm_rejects_non_nested():
    with pytest.raises(ValueError):
        error_norm(_field(12, 1.0), _field(16, 1.0))
    with pytest.raises(ValueError):
        error_norm(_field(16, 1.0, a=-1.0, b=1.0), _field(16, 1.0))


def test_observable_error_l1_scaling():
    f = _field(32, 1.0)
    g = _field(32, np.sqrt(1.1))
    # rho differs by 0.1 * |1|^2 * ncomp per node -> eta * mass(reference)
    err = observable_error_l1(g, f, 1.0, "density")
    assert np.isclose(err, 0.1 * mass(f), rtol=1e-12)
    assert observable_error_l1(f, f, 1.0, "current") == 0.0
    with pytest.raises(ValueError):
        observable_error_l1(f, f, 1.0, "momentum")


def test_attach_orders_recovers_power_law():
    errors = [1.0 * 4.0 ** (-2 * k) for k in range(4)]  # order 2 under ratio 4
    records = [ConvergenceRecord("tsfp", 1.0, 0.1, 0.1 / 4 ** k, errors[k],
                                 None, "ok", 0.0) for k in range(4)]
    attach_orders(records)
    assert records[0].order is None
    for rec in records[1:]:
        assert abs(rec.order - 2.0) < 1e-10


def test_attach_orders_spatial_axis():
    records = [ConvergenceRecord("cnfd", 1.0, 0.1 / 2 ** k, 1e-3,
                                 8.0 ** (-k), None, "ok", 0.0) for k in range(3)]
    attach_orders(records)
    assert abs(records[1].order - 3.0) < 1e-10


def test_fdtd_delta_rule():
    assert fdtd_delta_rule(1.0, 3) == 1.0
    assert fdtd_delta_rule(0.5, 1) == 0.25          # eps >= eps0/2
    assert fdtd_delta_rule(0.25, 1) == 0.25         # eps < eps0/2 -> eps0^2/4
    hs, taus = fdtd_temporal_cells(1.0, range(3))
    assert taus == [0.1, 0.1 / 8, 0.1 / 64]
    assert hs == [1.0 / 8.0, 1.0 / 64.0, 1.0 / 512.0]


def test_run_convergence_free_dirac_single_cell():
    spec = ExperimentSpec(problem="free-dirac", schemes=["cnfd"], eps=[1.0],
                          h=[1.0 / 256.0], tau=[1e-3], t_final=2.0)
    assert spec.reference == {"kind": "analytic"}
    rec = run_convergence(spec, threads=1)[0]
    assert rec.status == "ok"
    modal = free_dirac_cnfd_error(1.0, 1.0 / 256.0, 1e-3, 2.0)
    assert abs(rec.error - modal) < 1e-8 * modal


def test_run_convergence_records_unstable_cell():
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["lffd"], eps=[0.5],
                          h=[1.0 / 8.0], tau=[0.1], t_final=2.0,
                          reference={"h_e": 1.0 / 16.0, "tau_e": 1e-3})
    rec = run_convergence(spec, threads=1)[0]
    assert rec.status == "unstable"
    assert rec.error is None


def test_run_convergence_deterministic_under_threads():
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["tsfp", "ewi"],
                          eps=[1.0], h=[1.0 / 16.0], tau=[0.1, 0.05],
                          t_final=2.0, reference={"h_e": 1.0 / 16.0, "tau_e": 1e-3})
    a = run_convergence(spec, threads=2)
    b = run_convergence(spec, threads=2)
    assert [(r.scheme, r.eps, r.h, r.tau, r.error, r.order, r.status) for r in a] \
        == [(r.scheme, r.eps, r.h, r.tau, r.error, r.order, r.status) for r in b]


def test_reference_self_consistency():
    # halving tau_e moves the reference well below the certified cell errors
    ref_a = reference_solution("gaussian-1d", 1.0, 2.0,
                               {"kind": "tsfp-fine", "h_e": 1.0 / 16.0, "tau_e": 2e-3})
    ref_b = reference_solution("gaussian-1d", 1.0, 2.0,
                               {"kind": "tsfp-fine", "h_e": 1.0 / 16.0, "tau_e": 1e-3})
    drift = error_norm(ref_a, ref_b)
    smallest_certified = 1.3e-2  # TSFP error at tau = 0.1
    assert drift < 1e-2 * smallest_certified


def test_reference_limited_marking():
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0],
                          h=[1.0 / 16.0], tau=[1e-3], t_final=1.0,
                          reference={"h_e": 1.0 / 16.0, "tau_e": 1e-3},
                          reference_check=True)
    rec = run_convergence(spec, threads=1)[0]
    # the cell runs the reference's own parameters; it must be flagged
    assert rec.status == "reference-limited"


def test_stability_scan_flip():
    result = stability_scan("lffd", 1.0, 1.0 / 16.0, [0.9, 2.0])
    assert result[0.9] == "stable"
    assert result[2.0] == "unstable"


def test_stability_scan_cnfd_always_stable():
    result = stability_scan("cnfd", 0.5, 1.0 / 8.0, [0.5, 3.0, 10.0])
    assert set(result.values()) == {"stable"}


def test_chirp_field_flat_spectrum():
    g = Grid1D(-16.0, 16.0, 64)
    f = chirp_field(g)
    c = to_modes(f.values, 1)
    mags = np.abs(c)
    assert mags.max() < 0.72 and mags.min() > 0.70  # all modes equally loaded


def test_run_honeycomb_smoke():
    reports, snaps = run_honeycomb_2d(1.0, h=0.25, tau=0.02, t_final=0.1,
                                      snapshot_times=[0.0, 0.1])
    masses = [r.mass for r in reports]
    assert abs(masses[-1] - masses[0]) < 1e-11 * masses[0]
    rho1_0, rho2_0 = snaps[0.0]
    g = build_params("honeycomb-2d", 1.0, 0.25, 0.02, 0.1).grid
    i, j = np.unravel_index(np.argmax(rho1_0), rho1_0.shape)
    assert abs(g.gx.x[i]) < 0.26 and abs(g.gy.x[j]) < 0.26
    i, j = np.unravel_index(np.argmax(rho2_0), rho2_0.shape)
    assert abs(g.gx.x[i] - 1.0) < 0.26 and abs(g.gy.x[j]) < 0.26


def test_honeycomb_memory_guard():
    with pytest.raises(ConfigError):
        run_honeycomb_2d(1.0, h=0.25, tau=0.02, t_final=0.1, max_cells=100)


def test_spec_validation():
    with pytest.raises(ConfigError):
        ExperimentSpec(problem="nope", schemes=["tsfp"], eps=[1.0],
                       h=[0.1], tau=[0.1])
    with pytest.raises(ConfigError):
        ExperimentSpec(problem="gaussian-1d", schemes=["rk4"], eps=[1.0],
                       h=[0.1], tau=[0.1])
    with pytest.raises(ConfigError):
        ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0],
                       h=[0.1], tau=[3.0], t_final=2.0)
    with pytest.raises(ConfigError):
        ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0],
                       h=[0.1, 0.2], tau=[0.1], pairing="zip")


def test_spec_cells_pairings():
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0, 0.5],
                          h=[0.5, 0.25], tau=[0.1, 0.05], pairing="zip")
    assert len(spec.cells()) == 4
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0],
                          h=[0.5, 0.25], tau=[0.1, 0.05], pairing="cross")
    assert len(spec.cells()) == 4


def test_records_csv_format(tmp_path):
    recs = [ConvergenceRecord("tsfp", 1.0, 0.0625, 0.1, 1.234567890123456e-2,
                              None, "ok", 0.5),
            ConvergenceRecord("lffd", 0.5, 0.0625, 0.1, None, None, "unstable", 0.1)]
    path = tmp_path / "r.csv"
    write_records_csv(recs, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "scheme,eps,h,tau,error,order,status,wall_time"
    assert "0.012345678901234559" in lines[1] or "0.01234567890123456" in lines[1]
    assert lines[2].split(",")[4] == ""  # unstable cell has no error


def test_snapshot_round_trip(tmp_path):
    arr = np.arange(12.0).reshape(3, 4)
    bin_path, json_path = write_snapshot(tmp_path, "rho", arr, {"t": 1.0})
    meta = json.loads(json_path.read_text())
    back = np.frombuffer(bin_path.read_bytes(), dtype=meta["dtype"])
    assert np.array_equal(back.reshape(meta["shape"]), arr)


def test_potential_catalog():
    for cfg in ({"kind": "free"}, {"kind": "smooth-1d"},
                {"kind": "constant", "v0": 1.0, "a0": [0.5]},
                {"kind": "polynomial", "v_coeffs": [1.0, 2.0]},
                {"kind": "cosine", "v_amp": 0.5, "v_freq": 2.0}):
        pots = potential_from_config(cfg)
        g = Grid1D(-1.0, 1.0, 8)
        from dirac_lab.core import sample_potential
        v, a = sample_potential(pots, 0.0, g)
        assert np.all(np.isfinite(v))
    with pytest.raises(ConfigError):
        potential_from_config({"kind": "mystery"})


def test_custom_problem_build():
    custom = {"domain": [-2.0, 2.0],
              "potential": {"kind": "constant", "v0": 1.0},
              "initial": {"kind": "plane-wave", "k": np.pi, "amplitudes": [1.0, 0.0]}}
    p = build_params("custom", 1.0, 0.25, 0.1, 1.0, custom)
    assert p.grid.m == 16
    assert np.isclose(np.abs(p.initial.values[:, 0]).max(), 1.0)


def test_estimate_potential_maxima():
    p = build_params("gaussian-1d", 1.0, 1.0 / 32.0, 0.1, 1.0)
    vmax, amax = estimate_potential_maxima(p.potentials, p.grid)
    assert 1.1 < vmax < 1.3   # max of (1-x)/(1+x^2) near x = 1 - sqrt(2)
    assert 1.9 < amax <= 2.0  # max of (1+x)^2/(1+x^2) at x = 1


@pytest.mark.slow
def test_density_error_consistent_with_observable_table():
    # TSFP density error at (eps=1, tau=0.4, T=2) sits in the 2.5e-1 band
    ref = reference_solution("gaussian-1d", 1.0, 2.0,
                             {"kind": "tsfp-fine", "h_e": 1.0 / 16.0, "tau_e": 1e-3})
    from dirac_lab.harness import make_solver
    params = build_params("gaussian-1d", 1.0, 1.0 / 16.0, 0.4, 2.0)
    final = make_solver("tsfp", params).run()
    err = observable_error_l1(final, ref, 1.0, "density")
    assert 2.50e-1 / 2.0 <= err <= 2.50e-1 * 2.0, err


def test_run_convergence_l1_density_norm():
    spec = ExperimentSpec(problem="gaussian-1d", schemes=["tsfp"], eps=[1.0],
                          h=[1.0 / 16.0], tau=[0.1], t_final=2.0,
                          reference={"h_e": 1.0 / 16.0, "tau_e": 1e-3},
                          error_norm="l1-density")
    rec = run_convergence(spec, threads=1)[0]
    assert rec.status == "ok" and rec.error is not None and rec.error > 0


def test_attach_orders_skips_cross_block_boundaries():
    # both h and tau change between blocks of a cross sweep: no order there
    records = [ConvergenceRecord("tsfp", 1.0, 0.5, 0.1, 1.0, None, "ok", 0.0),
               ConvergenceRecord("tsfp", 1.0, 0.5, 0.05, 0.25, None, "ok", 0.0),
               ConvergenceRecord("tsfp", 1.0, 0.25, 0.1, 0.5, None, "ok", 0.0),
               ConvergenceRecord("tsfp", 1.0, 0.25, 0.05, 0.125, None, "ok", 0.0)]
    attach_orders(records)
    assert records[1].order == pytest.approx(2.0)
    assert records[2].order is None  # h and tau both changed
    assert records[3].order == pytest.approx(2.0)
