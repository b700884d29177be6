"""Static figures for trace files: running-minimum FG and OGR versus time."""

import math

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

ALGO_STYLE = {
    "sgsp": dict(color="tab:blue"),
    "papc": dict(color="tab:purple"),
    "cutting-planes": dict(color="tab:red"),
    "fo-pess": dict(color="tab:green"),
    "oco": dict(color="tab:orange"),
}


def running_min(values):
    out = np.array(values, dtype=float)
    best = math.inf
    for i, v in enumerate(out):
        if not math.isnan(v):
            best = min(best, v)
        out[i] = best
    return out


def plot_trace(trace, path, title=""):
    """FG and OGR curves of one run, running minima on log scales."""
    t = trace.column("elapsed_s")
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.4))
    axes[0].plot(t, running_min(trace.column("feas_gap")), lw=1.4)
    axes[0].set_xlabel("time [s]")
    axes[0].set_ylabel("min feasibility gap")
    axes[0].set_yscale("symlog", linthresh=1e-6)
    ogr = running_min(trace.column("ogr"))
    finite = np.isfinite(ogr)
    if finite.any():
        axes[1].plot(t[finite], ogr[finite], lw=1.4)
        axes[1].set_yscale("symlog", linthresh=1e-6)
    axes[1].set_xlabel("time [s]")
    axes[1].set_ylabel("min optimality gap ratio")
    if title:
        fig.suptitle(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_bench_cell(curves, metric, path, title=""):
    """Median running-minimum curves per algorithm for one bench cell.

    ``curves`` maps an algorithm name to a list of (times, values) pairs,
    one per seed.
    """
    fig, ax = plt.subplots(figsize=(5.4, 3.6))
    for algo, runs in sorted(curves.items()):
        if not runs:
            continue
        grid = np.unique(np.concatenate([t for t, _ in runs if len(t)]))
        if grid.size == 0:
            continue
        rows = []
        for t, v in runs:
            if len(t) == 0:
                continue
            mins = running_min(v)
            idx = np.searchsorted(t, grid, side="right") - 1
            row = np.where(idx >= 0, mins[np.clip(idx, 0, len(mins) - 1)], np.nan)
            rows.append(row)
        med = np.nanmedian(np.vstack(rows), axis=0)
        finite = np.isfinite(med)
        ax.plot(grid[finite], med[finite], label=algo,
                **ALGO_STYLE.get(algo, {}), lw=1.5)
    ax.set_xlabel("time [s]")
    ax.set_ylabel(f"median min {metric}")
    ax.set_yscale("symlog", linthresh=1e-6)
    ax.legend(fontsize=8)
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
