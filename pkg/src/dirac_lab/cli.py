"""Command-line entry point: solve, converge, stability, and honeycomb runs.

Configuration comes from flags, an optional JSON config file (flags win), and
dotted-path overrides via --set.  Every run writes a manifest.json echoing the
resolved configuration; feeding that manifest back through --config reproduces
the run.  Numeric CSV output uses 17 significant digits.
"""
from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import BlowUpError, ConfigError
from .fdtd import FDTD_SCHEMES, discrete_energy_fdtd
from .harness import (ExperimentSpec, auto_tau, build_params,
                      make_solver, run_convergence, run_honeycomb_2d,
                      stability_scan, write_manifest, write_records_csv,
                      write_snapshot)
from .observables import energy_continuous, mass

_FMT = "{:.17g}"


def _floats(text: str) -> list:
    return [float(tok) for tok in text.split(",") if tok]


def _apply_dotted(cfg: dict, assignment: str):
    if "=" not in assignment:
        raise ConfigError(f"--set expects key.path=value, got {assignment!r}")
    key, raw = assignment.split("=", 1)
    try:
        value = json.loads(raw)
    except json.JSONDecodeError:
        value = raw
    node = cfg
    parts = key.split(".")
    for part in parts[:-1]:
        node = node.setdefault(part, {})
    node[parts[-1]] = value


def _load_config(path: str) -> dict:
    data = json.loads(Path(path).read_text())
    if "spec" in data and isinstance(data["spec"], dict):
        return data["spec"]  # manifest round-trip
    return data


def _merge_config(args, keys) -> dict:
    cfg = _load_config(args.config) if getattr(args, "config", None) else {}
    for key, value in keys.items():
        if value is not None:
            cfg[key] = value
    for assignment in getattr(args, "set", None) or []:
        _apply_dotted(cfg, assignment)
    return cfg


def _resolve_taus(cfg: dict, raw_tau: str) -> None:
    """Fill cfg['tau']; 'auto' pins 0.9x the stability bound per mesh size."""
    if raw_tau is None:
        return
    if raw_tau.strip() == "auto":
        eps_list = cfg.get("eps", [1.0])
        h_list = cfg.get("h", [])
        t_final = float(cfg.get("t_final", 2.0))
        scheme = cfg.get("schemes", ["tsfp"])[0]
        problem = cfg.get("problem", "gaussian-1d")
        taus = []
        for h in h_list:
            cand = []
            for eps in eps_list:
                params = build_params(problem, eps, h, t_final, t_final,
                                      cfg.get("custom"))
                cand.append(auto_tau(scheme, eps, h, params, t_final))
            taus.append(min(cand))
        cfg["tau"] = taus
        cfg["pairing"] = "zip"
    else:
        cfg["tau"] = _floats(raw_tau)


def _out_dir(args) -> Path:
    out = Path(args.output)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _add_common(p: argparse.ArgumentParser):
    p.add_argument("--output", default="out", help="output directory")
    p.add_argument("--config", help="JSON config file (or a manifest.json)")
    p.add_argument("--set", action="append", metavar="KEY.PATH=VALUE",
                   help="dotted-path config override, repeatable")
    p.add_argument("--threads", type=int, default=None,
                   help="worker pool size (or env DIRAC_LAB_THREADS)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip figure rendering")


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="dirac-lab",
                                 description="Dirac equation solver benchmarks")
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    ps = sub.add_parser("solve", help="run one scheme on one parameter cell")
    ps.add_argument("--preset", default=None)
    ps.add_argument("--scheme", default=None)
    ps.add_argument("--eps", type=float, default=None)
    ps.add_argument("--h", dest="h", type=float, default=None)
    ps.add_argument("--tau", default=None, help="time step or 'auto'")
    ps.add_argument("--T", dest="t_final", type=float, default=None)
    ps.add_argument("--sample-every", type=int, default=1)
    _add_common(ps)

    pc = sub.add_parser("converge", help="error table over (scheme, eps, h, tau)")
    pc.add_argument("--preset", default=None)
    pc.add_argument("--scheme", default=None, help="comma-separated schemes")
    pc.add_argument("--eps", default=None)
    pc.add_argument("--h", dest="h", default=None, help="comma-separated mesh sizes")
    pc.add_argument("--tau", default=None, help="comma-separated steps or 'auto'")
    pc.add_argument("--T", dest="t_final", type=float, default=None)
    pc.add_argument("--pairing", choices=("cross", "zip"), default=None)
    pc.add_argument("--reference-check", action="store_true")
    _add_common(pc)

    pst = sub.add_parser("stability", help="classify runs at factors of the bound")
    pst.add_argument("--scheme", default="lffd")
    pst.add_argument("--eps", default="1")
    pst.add_argument("--h", dest="h", type=float, default=1.0 / 16.0)
    pst.add_argument("--factors", default="0.9,2.0")
    pst.add_argument("--v0", type=float, default=1.0)
    pst.add_argument("--a0", type=float, default=1.0)
    pst.add_argument("--T", dest="t_final", type=float, default=2.0)
    _add_common(pst)

    ph = sub.add_parser("honeycomb", help="2D honeycomb lattice run (TSFP)")
    ph.add_argument("--eps", default="1")
    ph.add_argument("--h", dest="h", type=float, default=1.0 / 16.0)
    ph.add_argument("--tau", type=float, default=0.01)
    ph.add_argument("--T", dest="t_final", type=float, default=4.0)
    ph.add_argument("--snapshots", default=None, help="comma-separated times")
    ph.add_argument("--max-cells", type=int, default=1 << 22)
    _add_common(ph)
    return ap


_SOLVE_DEFAULTS = {"problem": "gaussian-1d", "schemes": ["tsfp"], "eps": [1.0],
                   "h": [1.0 / 16.0], "tau": [0.01], "t_final": 2.0}


def _cmd_solve(args) -> int:
    out = _out_dir(args)
    cfg = _merge_config(args, {
        "problem": args.preset,
        "schemes": [args.scheme] if args.scheme else None,
        "eps": [args.eps] if args.eps is not None else None,
        "h": [args.h] if args.h is not None else None,
        "t_final": args.t_final,
    })
    for key, value in _SOLVE_DEFAULTS.items():
        cfg.setdefault(key, value)
    scheme = cfg["schemes"][0]
    eps, h, t_final = cfg["eps"][0], cfg["h"][0], float(cfg["t_final"])
    if args.tau is not None:
        if args.tau.strip() == "auto":
            params0 = build_params(cfg["problem"], eps, h, t_final, t_final,
                                   cfg.get("custom"))
            cfg["tau"] = [auto_tau(scheme, eps, h, params0, t_final)]
        else:
            cfg["tau"] = [float(args.tau)]
    tau = float(cfg["tau"][0])
    params = build_params(cfg["problem"], eps, h, tau, t_final, cfg.get("custom"))
    solver = make_solver(scheme, params)
    static = params.potentials.time_independent
    series = {"t": [], "mass": [], "energy": []}

    def observe(st):
        if st.n % args.sample_every and st.n != params.n_steps:
            return
        series["t"].append(st.t)
        series["mass"].append(mass(st.field))
        if static:
            if scheme in FDTD_SCHEMES:
                e = discrete_energy_fdtd(st.field, params.potentials, eps)
            else:
                e = energy_continuous(st.field, params.potentials, eps)
        else:
            e = None
        series["energy"].append(e)

    t0 = time.perf_counter()
    status, exit_code, fail_step = "ok", 0, None
    try:
        solver.run(callback=observe)
    except BlowUpError as exc:
        status, exit_code, fail_step = "unstable", 2, exc.step
        print(f"unstable: blow-up at step {exc.step}", file=sys.stderr)
    wall = time.perf_counter() - t0

    lines = ["t,mass,energy"]
    for t, m, e in zip(series["t"], series["mass"], series["energy"]):
        etxt = "" if e is None else _FMT.format(e)
        lines.append(f"{_FMT.format(t)},{_FMT.format(m)},{etxt}")
    (out / "observables.csv").write_text("\n".join(lines) + "\n")

    final = solver.values
    snap = np.stack([final.real, final.imag], axis=-1)
    write_snapshot(out / "snapshots", "final", snap,
                   {"t": solver.t, "component": "spinor (re, im) interleaved",
                    "grid": _grid_meta(params.grid)})
    write_manifest(out / "manifest.json", "solve", cfg,
                   {"status": status, "blowup_step": fail_step, "wall_time_s": wall})
    if not args.no_figures and series["t"]:
        from .plots import timeseries_figure
        timeseries_figure(series, out / "figures" / "observables.png",
                          title=f"{scheme} eps={eps:g} tau={tau:g}")
    return exit_code


def _grid_meta(grid) -> dict:
    if grid.ndim == 1:
        return {"a": grid.a, "b": grid.b, "m": grid.m}
    return {"x": {"a": grid.gx.a, "b": grid.gx.b, "m": grid.gx.m},
            "y": {"a": grid.gy.a, "b": grid.gy.b, "m": grid.gy.m}}


def _cmd_converge(args) -> int:
    out = _out_dir(args)
    cfg = _merge_config(args, {
        "problem": args.preset,
        "schemes": args.scheme.split(",") if args.scheme else None,
        "eps": _floats(args.eps) if args.eps else None,
        "h": _floats(args.h) if args.h else None,
        "t_final": args.t_final,
        "pairing": args.pairing,
        "reference_check": True if args.reference_check else None,
    })
    cfg.setdefault("problem", "gaussian-1d")
    cfg.setdefault("schemes", ["tsfp"])
    cfg.setdefault("eps", [1.0])
    cfg.setdefault("t_final", 2.0)
    cfg.setdefault("h", [1.0 / 16.0])
    _resolve_taus(cfg, args.tau)
    if not cfg.get("tau"):
        raise ConfigError("converge requires a --tau list (field: tau)")
    spec = ExperimentSpec.from_dict(cfg)
    t0 = time.perf_counter()
    records = run_convergence(spec, threads=args.threads)
    wall = time.perf_counter() - t0
    write_records_csv(records, out / "results.csv")
    write_manifest(out / "manifest.json", "converge", spec.to_dict(),
                   {"wall_time_s": wall})
    if not args.no_figures:
        from .plots import convergence_figure
        convergence_figure(records, out / "figures" / "convergence.png",
                           title=f"{spec.problem}")
    return 0


def _cmd_stability(args) -> int:
    out = _out_dir(args)
    cfg = _merge_config(args, {
        "scheme": args.scheme, "eps": _floats(args.eps), "h": args.h,
        "factors": _floats(args.factors), "v0": args.v0, "a0": args.a0,
        "t_final": args.t_final,
    })
    rows = []
    from .fdtd import stability_bound
    for eps in cfg["eps"]:
        result = stability_scan(cfg["scheme"], eps, cfg["h"], cfg["factors"],
                                v0=cfg["v0"], a0=cfg["a0"], t_final=cfg["t_final"])
        bound = stability_bound(cfg["scheme"], eps, cfg["h"], cfg["v0"], cfg["a0"])
        for f, status in result.items():
            rows.append({"scheme": cfg["scheme"], "eps": eps, "h": cfg["h"],
                         "factor": f, "tau": f * bound, "status": status})
    lines = ["scheme,eps,h,factor,tau,status"]
    for r in rows:
        lines.append(f"{r['scheme']},{_FMT.format(r['eps'])},{_FMT.format(r['h'])},"
                     f"{_FMT.format(r['factor'])},{_FMT.format(r['tau'])},{r['status']}")
    (out / "stability.csv").write_text("\n".join(lines) + "\n")
    write_manifest(out / "manifest.json", "stability", cfg, {})
    if not args.no_figures:
        from .plots import stability_figure
        stability_figure(rows, out / "figures" / "stability.png",
                         title=f"{cfg['scheme']} stability scan")
    return 0


def _cmd_honeycomb(args) -> int:
    out = _out_dir(args)
    snaps_default = f"0,{args.t_final / 2:g},{args.t_final:g}"
    cfg = _merge_config(args, {
        "eps": _floats(args.eps), "h": args.h, "tau": args.tau,
        "t_final": args.t_final,
        "snapshots": _floats(args.snapshots or snaps_default),
        "max_cells": args.max_cells,
    })
    for eps in cfg["eps"]:
        tag = f"eps{eps:g}".replace(".", "p")
        reports, snapshots = run_honeycomb_2d(
            eps, h=cfg["h"], tau=cfg["tau"], t_final=cfg["t_final"],
            snapshot_times=cfg["snapshots"], max_cells=cfg["max_cells"])
        lines = ["t,mass"]
        for rep in reports:
            lines.append(f"{_FMT.format(rep.t)},{_FMT.format(rep.mass)}")
        (out / f"mass_{tag}.csv").write_text("\n".join(lines) + "\n")
        from .harness import honeycomb_2d_params
        grid = honeycomb_2d_params(eps, cfg["h"], cfg["tau"], cfg["t_final"]).grid
        for t, (rho1, rho2) in snapshots.items():
            ttag = f"{t:g}".replace(".", "p")
            write_snapshot(out / "snapshots", f"rho1_{tag}_t{ttag}", rho1,
                           {"t": t, "component": "rho_1", "grid": _grid_meta(grid)})
            write_snapshot(out / "snapshots", f"rho2_{tag}_t{ttag}", rho2,
                           {"t": t, "component": "rho_2", "grid": _grid_meta(grid)})
            if not args.no_figures:
                from .plots import density_figure
                density_figure(rho1, rho2, grid, t,
                               out / "figures" / f"density_{tag}_t{ttag}.png")
    write_manifest(out / "manifest.json", "honeycomb", cfg, {})
    return 0


def main(argv=None) -> int:
    ap = build_parser()
    args = ap.parse_args(argv)
    handlers = {"solve": _cmd_solve, "converge": _cmd_converge,
                "stability": _cmd_stability, "honeycomb": _cmd_honeycomb}
    try:
        return handlers[args.command](args)
    except (ConfigError, ValueError) as exc:
        ap.error(str(exc))
        return 2


if __name__ == "__main__":
    sys.exit(main())
