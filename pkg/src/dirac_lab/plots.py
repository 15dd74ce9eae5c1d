"""Figure rendering for the CLI report path (written next to the CSV output)."""
from __future__ import annotations

from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

__all__ = ["convergence_figure", "timeseries_figure", "stability_figure",
           "density_figure"]

_DPI = 130


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, dpi=_DPI, bbox_inches="tight")
    plt.close(fig)
    return path


def convergence_figure(records, path, title="convergence"):
    """Log-log error plot per (scheme, eps) row with a slope-2 guide."""
    rows = {}
    for r in records:
        if r.status == "unstable" or r.error is None:
            continue
        rows.setdefault((r.scheme, r.eps), []).append(r)
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    guide_x = None
    for (scheme, eps), rs in rows.items():
        taus = [r.tau for r in rs]
        xs = taus if len(set(taus)) > 1 else [r.h for r in rs]
        xlabel = "tau" if len(set(taus)) > 1 else "h"
        errs = [r.error for r in rs]
        ax.loglog(xs, errs, "o-", label=f"{scheme}, eps={eps:g}")
        ax.set_xlabel(xlabel)
        if guide_x is None and len(xs) > 1:
            guide_x = (np.asarray(sorted(xs)), errs[int(np.argmax(xs))])
    if guide_x is not None:
        x, e0 = guide_x
        ax.loglog(x, e0 * (x / x.max()) ** 2, "k--", lw=0.8, label="slope 2")
    ax.set_ylabel("l2 error")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    return _save(fig, path)


def timeseries_figure(ts, path, title="observables"):
    """Mass and energy traces over time from a solve run."""
    t = np.asarray(ts["t"])
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    axes[0].plot(t, np.asarray(ts["mass"]))
    axes[0].set_xlabel("t")
    axes[0].set_ylabel("mass")
    if ts.get("energy") and any(e is not None for e in ts["energy"]):
        axes[1].plot(t, [np.nan if e is None else e for e in ts["energy"]])
        axes[1].set_ylabel("energy")
    else:
        axes[1].text(0.5, 0.5, "energy not sampled", ha="center", va="center",
                     transform=axes[1].transAxes)
    axes[1].set_xlabel("t")
    fig.suptitle(title)
    return _save(fig, path)


def stability_figure(rows, path, title="stability scan"):
    """Stable/unstable markers as a function of the bound factor."""
    fig, ax = plt.subplots(figsize=(6.0, 3.2))
    for row in rows:
        color = "tab:green" if row["status"] == "stable" else "tab:red"
        marker = "o" if row["status"] == "stable" else "x"
        ax.scatter(row["factor"], row["eps"], c=color, marker=marker, s=60)
    ax.axvline(1.0, color="k", lw=0.8, ls="--")
    ax.set_xlabel("tau / stability bound")
    ax.set_ylabel("eps")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    return _save(fig, path)


def density_figure(rho1, rho2, grid, t, path):
    """Side-by-side component densities of a 2D snapshot."""
    extent = [grid.gy.a, grid.gy.b, grid.gx.a, grid.gx.b]
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.8))
    for ax, rho, name in zip(axes, (rho1, rho2), ("rho_1", "rho_2")):
        im = ax.imshow(rho, origin="lower", extent=extent, aspect="equal",
                       cmap="viridis")
        ax.set_title(f"{name}, t = {t:g}")
        ax.set_xlabel("y")
        ax.set_ylabel("x")
        fig.colorbar(im, ax=ax, shrink=0.85)
    return _save(fig, path)
