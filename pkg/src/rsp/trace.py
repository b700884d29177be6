"""Checkpointed iteration traces shared by all solvers and baselines."""

import csv
import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

CSV_COLUMNS = ("iter", "elapsed_s", "obj", "feas_gap", "ogr", "cert_bound")


@dataclass
class Checkpoint:
    iteration: int
    elapsed_s: float
    obj: float
    feas_gap: float
    ogr: float = float("nan")
    cert_bound: float = float("nan")

    def row(self):
        return (self.iteration, self.elapsed_s, self.obj, self.feas_gap, self.ogr,
                self.cert_bound)


@dataclass
class IterTrace:
    """Per-checkpoint records plus the solver's final (ergodic) output."""

    checkpoints: list = field(default_factory=list)
    x: Optional[np.ndarray] = None
    status: str = "ok"  # ok | time_budget | budget_exhausted
    n_iters: int = 0
    extras: dict = field(default_factory=dict)
    iterates: Optional[np.ndarray] = None
    weights: Optional[np.ndarray] = None

    @property
    def final(self):
        return self.checkpoints[-1] if self.checkpoints else None

    def column(self, name):
        idx = CSV_COLUMNS.index(name)
        return np.array([cp.row()[idx] for cp in self.checkpoints], dtype=float)

    def best_feas_gap(self):
        col = self.column("feas_gap")
        return float(np.min(col)) if col.size else math.inf

    def apply_lower_bound(self, lb, eps, lb_floor=1e-6):
        """Recompute the OGR column from stored objectives and a lower bound."""
        for cp in self.checkpoints:
            cp.ogr = optimality_gap_ratio_value(cp.obj, cp.feas_gap, lb, eps, lb_floor)


def optimality_gap_ratio_value(worst_obj, feas_gap, lb, eps, lb_floor=1e-6):
    """(worst-case objective - LB)/|LB|, +inf when the point is eps-infeasible.

    Feasibility is the closed condition feas_gap <= eps; the denominator uses
    |LB| floored away from zero.
    """
    if not (feas_gap <= eps):
        return math.inf
    return (worst_obj - lb) / max(abs(lb), lb_floor)


def write_trace_csv(trace, path):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for cp in trace.checkpoints:
            w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in cp.row()])


def read_trace_csv(path):
    trace = IterTrace()
    with open(path, newline="") as fh:
        rd = csv.DictReader(fh)
        for row in rd:
            trace.checkpoints.append(
                Checkpoint(
                    iteration=int(row["iter"]),
                    elapsed_s=float(row["elapsed_s"]),
                    obj=float(row["obj"]),
                    feas_gap=float(row["feas_gap"]),
                    ogr=float(row["ogr"]),
                    cert_bound=float(row["cert_bound"]),
                )
            )
    if trace.checkpoints:
        trace.n_iters = trace.checkpoints[-1].iteration
    return trace
