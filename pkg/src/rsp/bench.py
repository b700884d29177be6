"""Benchmark harness: runs algorithm/instance cells, writes trace CSVs,
time-indexed minima summaries and comparison figures."""

import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import plots, qpbench
from .perspective import dual_bounds
from .sgsp import AdaptiveNormalized, SaddleState, SgspConfig, sgsp_run, slater_search
from .trace import write_trace_csv

DEFAULT_ALGOS = ("cutting-planes", "sgsp", "fo-pess", "oco")


@dataclass
class BenchConfig:
    sizes: list = field(default_factory=lambda: [(10, 10, 10, 0), (10, 10, 10, 3)])
    seeds: list = field(default_factory=lambda: [0, 1, 2, 3, 4])
    algorithms: tuple = DEFAULT_ALGOS
    eps: float = 1e-3
    time_budget_s: float = 600.0
    checkpoint_every: int = 100
    sgsp_iters: int = 30000
    fo_iters: int = 12000
    oco_iters: int = 60000
    oco_rounds: int = 20
    cp_budget: int = 60
    jobs: int = 1
    figures: bool = True


def run_sgsp_on_instance(inst, eps, n_iters, checkpoint_every=100, lb=None,
                         time_budget_s=None, start=None, seed=0):
    """The full saddle-point pipeline on a QP instance.

    The uncertain objective is epigraph-lifted; a Slater certificate is taken
    at the strictly feasible origin (the -0.05 constant guarantees it) or by
    search when the supplied start is infeasible; the run uses the adaptive
    normalized steps with step-weighted averaging.
    """
    p = qpbench.to_robust_problem(inst)
    n = inst.n
    x0 = np.zeros(p.n)
    cert = slater_search(p, x0=x0, budget=20000, cfg_seed=seed)
    bounds = dual_bounds(p, cert)

    def pess(xt):
        return [qpbench.worst_case_value(inst, i, xt[:n])[0] for i in range(1, inst.m + 1)]

    def obj_fn(xt):
        return qpbench.worst_case_objective(inst, xt[:n])

    st = None
    if start is not None:
        t0 = qpbench.worst_case_objective(inst, start)
        st = SaddleState.cold(p)
        st.x = np.concatenate([start, [t0 + 0.05]])
    cfg = SgspConfig(
        n_iters=n_iters, step_policy=AdaptiveNormalized(), checkpoint_every=checkpoint_every,
        lb=lb, lb_eps=eps, time_budget_s=time_budget_s, seed=seed, objective_fn=obj_fn,
    )
    return sgsp_run(p, bounds, cfg, start=st, pessimizer=pess)


def run_cell(size, seed, algorithms, cfg):
    """All algorithm runs for one sampled instance; cutting planes first so
    its cut-based lower bound feeds every OGR column."""
    n, K, L, m = size
    inst = qpbench.gen_instance(n, K, L, m, seed)
    pp = qpbench.as_pess_problem(inst)
    start = qpbench.nominal_solution(pp)
    results = {}
    errors = {}

    lb = None
    if "cutting-planes" in algorithms or len(algorithms) > 1:
        try:
            tr_cp = qpbench.cutting_planes(
                inst, eps=cfg.eps, budget=cfg.cp_budget, time_budget_s=cfg.time_budget_s
            )
            lb = tr_cp.extras["lb"]
            tr_cp.apply_lower_bound(lb, cfg.eps)
            if "cutting-planes" in algorithms:
                results["cutting-planes"] = tr_cp
        except Exception as exc:  # cell errors are recorded, the run continues
            errors["cutting-planes"] = repr(exc)

    for algo in algorithms:
        if algo == "cutting-planes" or algo in results:
            continue
        try:
            if algo == "sgsp":
                tr = run_sgsp_on_instance(
                    inst, cfg.eps, cfg.sgsp_iters, cfg.checkpoint_every, lb=lb,
                    time_budget_s=cfg.time_budget_s, start=start, seed=seed,
                )
            elif algo == "fo-pess":
                tr = qpbench.fo_pess(
                    inst, budget=cfg.fo_iters, eps=cfg.eps,
                    checkpoint_every=cfg.checkpoint_every, lb=lb,
                    time_budget_s=cfg.time_budget_s, start=start,
                )
            elif algo == "oco":
                tr = qpbench.oco_ogd(
                    inst, eps=cfg.eps, budget=cfg.oco_iters, outer_rounds=cfg.oco_rounds,
                    checkpoint_every=cfg.checkpoint_every, lb=lb,
                    time_budget_s=cfg.time_budget_s, start=start,
                )
            else:
                raise ValueError(f"unknown algorithm '{algo}'")
            results[algo] = tr
        except Exception as exc:
            errors[algo] = repr(exc)
    return inst, results, errors, lb


def _cell_name(size, seed):
    n, K, L, m = size
    return f"n{n}_K{K}_L{L}_m{m}_seed{seed}"


def _cell_task(args):
    size, seed, algorithms, cfg, outdir = args
    _, results, errors, lb = run_cell(size, seed, algorithms, cfg)
    name = _cell_name(size, seed)
    summary = {"lb": lb, "errors": errors, "algorithms": {}}
    curves = {}
    for algo, tr in results.items():
        write_trace_csv(tr, os.path.join(outdir, "cells", f"{name}_{algo}.csv"))
        t = tr.column("elapsed_s")
        fg = plots.running_min(tr.column("feas_gap"))
        ogr = plots.running_min(tr.column("ogr"))
        summary["algorithms"][algo] = {
            "status": tr.status,
            "n_checkpoints": len(tr.checkpoints),
            "t": t.tolist(),
            "min_fg": fg.tolist(),
            "min_ogr": [None if not math.isfinite(v) else v for v in ogr],
        }
        curves[algo] = (t, tr.column("feas_gap"), tr.column("ogr"))
    return size, seed, name, summary, curves


def run_bench(cfg, outdir):
    """Execute the configured grid; returns the summary dictionary."""
    os.makedirs(os.path.join(outdir, "cells"), exist_ok=True)
    if cfg.figures:
        os.makedirs(os.path.join(outdir, "figures"), exist_ok=True)

    tasks = [
        (tuple(size), seed, tuple(cfg.algorithms), cfg, outdir)
        for size in cfg.sizes
        for seed in cfg.seeds
    ]
    if cfg.jobs > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as ex:
            outputs = list(ex.map(_cell_task, tasks))
    else:
        outputs = [_cell_task(t) for t in tasks]

    summary = {"eps": cfg.eps, "cells": {}}
    by_size = {}
    for size, seed, name, cell_summary, curves in outputs:
        summary["cells"][name] = cell_summary
        by_size.setdefault(tuple(size), {}).setdefault(seed, curves)

    if cfg.figures:
        for size, seed_curves in by_size.items():
            fg_curves, ogr_curves = {}, {}
            for curves in seed_curves.values():
                for algo, (t, fg, ogr) in curves.items():
                    fg_curves.setdefault(algo, []).append((t, fg))
                    ogr_curves.setdefault(algo, []).append((t, ogr))
            tag = "n{}_K{}_L{}_m{}".format(*size)
            plots.plot_bench_cell(
                fg_curves, "feasibility gap",
                os.path.join(outdir, "figures", f"fg_{tag}.png"), title=tag,
            )
            plots.plot_bench_cell(
                ogr_curves, "optimality gap ratio",
                os.path.join(outdir, "figures", f"ogr_{tag}.png"), title=tag,
            )

    with open(os.path.join(outdir, "summary.json"), "w") as fh:
        json.dump(summary, fh, indent=1, sort_keys=True)
    return summary
