"""Command-line front end: instance generation, solving, projection
debugging and benchmark orchestration.

Exit codes: 0 success / eps-feasible, 2 usage or validation error, 3 budget
exhausted, 4 numerical failure.
"""

import argparse
import json
import math
import os
import sys

import numpy as np

from . import errors, io, qpbench, sets
from .bench import BenchConfig, run_bench
from .model import RobustProblem, validate_problem
from .papc import compile_biaffine, default_config, papc_run
from .perspective import dual_bounds
from .qpbench import QpInstance
from .sgsp import AdaptiveNormalized, SgspConfig, TheoremScaled, sgsp_run, slater_search
from .trace import write_trace_csv

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_BUDGET = 3
EXIT_NUMERICAL = 4

_VALIDATION_ERRORS = (
    errors.DimensionMismatch,
    errors.NotBiaffine,
    errors.UnsupportedSet,
    errors.RankDeficient,
    errors.OriginNotInZ,
    errors.NotStrictlyFeasible,
    ValueError,
    OSError,
)
_NUMERICAL_ERRORS = (errors.NoConvergence, errors.MasterFailure, errors.OracleFailure,
                     errors.InvalidSteps)


def _seed_default():
    env = os.environ.get("RSP_SEED")
    return int(env) if env else 0


def read_config_file(path):
    """Flat key = value lines; '#' starts a comment."""
    out = {}
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"bad config line: {line!r}")
            key, val = line.split("=", 1)
            out[key.strip()] = val.strip()
    return out


def _workpath(args, p):
    return p if os.path.isabs(p) else os.path.join(args.workdir, p)


def cmd_gen(args):
    inst = qpbench.gen_instance(args.n, args.K, args.L, args.m, args.seed)
    out = _workpath(args, args.out)
    io.save_instance(inst, out)
    for i in range(inst.m + 1):
        s1 = np.linalg.norm(inst.P[i].reshape(-1, inst.n), 2)
        s2 = np.linalg.norm(inst.b[i])
        print(f"block {i}: stacked spectral norm {s1:.12f}, |b| {s2:.12f}")
    print(f"wrote {out}")
    return EXIT_OK


def _exit_from_trace(trace, eps, has_constraints):
    if has_constraints:
        reached = trace.best_feas_gap() <= eps
    else:
        reached = trace.status in ("ok",)
    if reached:
        return EXIT_OK
    return EXIT_BUDGET


_SOLVE_DEFAULTS = {
    "eps": 1e-3,
    "budget_iters": 20000,
    "budget_s": None,
    "checkpoint_every": 100,
    "steps": "adaptive",
    "lb": None,
    "seed": None,
}


def _fill_solve_args(args):
    """Flag > config-file value > built-in default."""
    cfg = read_config_file(_workpath(args, args.config)) if args.config else {}
    casts = {"eps": float, "budget_iters": int, "budget_s": float,
             "checkpoint_every": int, "steps": str, "lb": float, "seed": int}
    for key, default in _SOLVE_DEFAULTS.items():
        if getattr(args, key) is None:
            if key in cfg:
                setattr(args, key, casts[key](cfg[key]))
            else:
                setattr(args, key, default)
    if args.seed is None:
        args.seed = _seed_default()


def cmd_solve(args):
    _fill_solve_args(args)
    inst = io.load_instance(_workpath(args, args.instance))
    eps = args.eps

    if args.algo == "sgsp":
        trace, m = _solve_sgsp(inst, args)
    elif args.algo == "papc":
        trace, m = _solve_papc(inst, args)
    elif args.algo in ("cutting-planes", "fo-pess", "oco"):
        trace, m = _solve_baseline(inst, args)
    else:
        raise ValueError(f"unknown algorithm '{args.algo}'")

    out = _workpath(args, args.out)
    write_trace_csv(trace, out)
    final = trace.final
    print(f"status={trace.status} iters={trace.n_iters} "
          f"obj={final.obj:.6g} feas_gap={final.feas_gap:.3g}")
    print(f"wrote {out}")
    if args.plot:
        from .plots import plot_trace

        plot_trace(trace, os.path.splitext(out)[0] + ".png", title=args.algo)
    return _exit_from_trace(trace, eps, m > 0)


def _needs_split(p):
    from .sets import Intersection

    return isinstance(p.domain, Intersection) or any(
        isinstance(con.zset, Intersection) for con in p.constraints
    )


def _solve_sgsp(inst, args):
    if isinstance(inst, QpInstance):
        from .bench import run_sgsp_on_instance

        trace = run_sgsp_on_instance(
            inst, args.eps, args.budget_iters, args.checkpoint_every,
            lb=args.lb, time_budget_s=args.budget_s, seed=args.seed,
        )
        return trace, inst.m
    p = inst
    validate_problem(p).raise_if_failed()
    policy = TheoremScaled() if args.steps == "scaled" else AdaptiveNormalized()
    cfg = SgspConfig(
        n_iters=args.budget_iters, step_policy=policy,
        checkpoint_every=args.checkpoint_every, eps_stop=args.eps,
        time_budget_s=args.budget_s, lb=args.lb, lb_eps=args.eps, seed=args.seed,
    )
    if _needs_split(p):
        from .sgsp import sgsp_run_split
        from .splitting import lift_problem, omega_bounds, verify_assumption5

        lifted = lift_problem(p)
        base = lifted.base
        cert = slater_search(base, x0=sets.project_simple(base.domain, np.zeros(base.n)),
                             budget=20000, cfg_seed=args.seed)
        bounds = dual_bounds(base, cert)
        specs = omega_bounds(lifted, mu_bar=verify_assumption5(base))
        return sgsp_run_split(lifted, bounds, specs, cfg), p.m
    cert = slater_search(p, x0=sets.project_simple(p.domain, np.zeros(p.n)),
                         budget=20000, cfg_seed=args.seed)
    bounds = dual_bounds(p, cert)
    return sgsp_run(p, bounds, cfg), p.m


def _solve_papc(inst, args):
    if isinstance(inst, QpInstance):
        raise errors.NotBiaffine("papc requires biaffine constraints; QP instances "
                                 "are quadratic in the decision")
    p = inst
    validate_problem(p).raise_if_failed()
    if _needs_split(p):
        from .papc import papc_run_split
        from .splitting import lift_problem

        lifted = lift_problem(p)
        compiled = compile_biaffine(lifted.base)
        cfg = default_config(
            compiled, n_iters=args.budget_iters, splits=lifted.splits,
            checkpoint_every=args.checkpoint_every, time_budget_s=args.budget_s,
            lb=args.lb, lb_eps=args.eps,
        )
        return papc_run_split(lifted, cfg=cfg), p.m
    compiled = compile_biaffine(p)
    cfg = default_config(
        compiled, n_iters=args.budget_iters, checkpoint_every=args.checkpoint_every,
        eps_stop=args.eps, time_budget_s=args.budget_s, lb=args.lb, lb_eps=args.eps,
    )
    return papc_run(compiled, cfg=cfg), p.m


def _solve_baseline(inst, args):
    pp = qpbench.as_pess_problem(inst)
    if args.algo == "cutting-planes":
        trace = qpbench.cutting_planes(
            inst, eps=args.eps, budget=max(args.budget_iters // 100, 10),
            time_budget_s=args.budget_s,
        )
        trace.apply_lower_bound(trace.extras["lb"], args.eps)
    elif args.algo == "fo-pess":
        trace = qpbench.fo_pess(
            inst, budget=args.budget_iters, eps=args.eps,
            checkpoint_every=args.checkpoint_every, lb=args.lb,
            time_budget_s=args.budget_s, stop_eps=args.eps,
        )
    else:
        trace = qpbench.oco_ogd(
            inst, eps=args.eps, budget=args.budget_iters,
            checkpoint_every=args.checkpoint_every, lb=args.lb,
            time_budget_s=args.budget_s,
        )
    return trace, pp.m


def cmd_project(args):
    spec_doc = json.loads(args.set)
    base = io.set_from_json(spec_doc)
    point = np.array([float(v) for v in args.point.split(",")], dtype=float)
    lam = args.lam
    cap = args.lambda_cap if args.lambda_cap is not None else math.inf
    spec = sets.ConeLiftSpec(base, cap)
    pz = sets.project_simple(base, point)
    zt, mu = sets.project_cone_lift(spec, (point, lam))
    resid = sets.cone_lift_kkt_residual(spec, (point, lam), (zt, mu))
    print(f"P_Z(point)      = {pz.tolist()}")
    print(f"P_cone(point,lam) = ({zt.tolist()}, {mu:.17g})")
    print(f"mu*             = {mu:.17g}")
    print(f"kkt_residual    = {resid:.3e}")
    return EXIT_OK


def _parse_sizes(text):
    sizes = []
    for tok in text.replace(";", ",").split(","):
        tok = tok.strip()
        if not tok:
            continue
        parts = tok.split("x")
        if len(parts) != 4:
            raise ValueError(f"size must be nxKxLxm, got {tok!r}")
        sizes.append(tuple(int(v) for v in parts))
    return sizes


def _parse_seeds(text):
    text = text.strip()
    if "," in text:
        return [int(v) for v in text.split(",") if v.strip()]
    return list(range(int(text)))


def cmd_bench(args):
    cfg_map = read_config_file(_workpath(args, args.config)) if args.config else {}

    def get(key, default):
        return cfg_map.get(key, default)

    cfg = BenchConfig(
        sizes=_parse_sizes(get("sizes", "10x10x10x0,10x10x10x3")),
        seeds=_parse_seeds(get("seeds", "5")),
        algorithms=tuple(
            a.strip() for a in get("algorithms", "cutting-planes,sgsp,fo-pess,oco").split(",")
        ),
        eps=float(get("eps", "0.001")),
        time_budget_s=float(get("time_budget_s", "600")),
        checkpoint_every=int(get("checkpoint_every", "100")),
        sgsp_iters=int(get("sgsp_iters", "30000")),
        fo_iters=int(get("fo_iters", "12000")),
        oco_iters=int(get("oco_iters", "60000")),
        oco_rounds=int(get("oco_rounds", "20")),
        cp_budget=int(get("cp_budget", "60")),
        jobs=args.jobs if args.jobs is not None else int(get("jobs", "2")),
        figures=get("figures", "true").lower() != "false",
    )
    outdir = _workpath(args, args.out)
    summary = run_bench(cfg, outdir)
    n_err = sum(len(c["errors"]) for c in summary["cells"].values())
    print(f"bench complete: {len(summary['cells'])} cells, {n_err} cell errors")
    print(f"results in {outdir}")
    return EXIT_OK


def build_parser():
    ap = argparse.ArgumentParser(prog="rsp", description=__doc__)
    ap.add_argument("--workdir", default=".", help="base directory for relative paths")
    sub = ap.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen", help="sample a robust QP instance")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--K", type=int, required=True)
    g.add_argument("--L", type=int, required=True)
    g.add_argument("--m", type=int, required=True)
    g.add_argument("--seed", type=int, default=_seed_default())
    g.add_argument("--out", required=True)
    g.set_defaults(fn=cmd_gen)

    s = sub.add_parser("solve", help="run one solver on an instance file")
    s.add_argument("--algo", required=True,
                   choices=["sgsp", "papc", "cutting-planes", "fo-pess", "oco"])
    s.add_argument("--instance", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--config", default=None, help="flat key = value defaults file")
    s.add_argument("--eps", type=float, default=None)
    s.add_argument("--budget-iters", type=int, default=None)
    s.add_argument("--budget-s", type=float, default=None)
    s.add_argument("--checkpoint-every", type=int, default=None)
    s.add_argument("--steps", choices=["scaled", "adaptive"], default=None)
    s.add_argument("--lb", type=float, default=None)
    s.add_argument("--seed", type=int, default=None)
    s.add_argument("--plot", action="store_true")
    s.set_defaults(fn=cmd_solve)

    pr = sub.add_parser("project", help="debug the cone-lift projections")
    pr.add_argument("--set", required=True, help='set JSON, e.g. {"kind":"l2ball","radius":1}')
    pr.add_argument("--point", required=True, help="comma-separated z coordinates")
    pr.add_argument("--lam", type=float, required=True)
    pr.add_argument("--lambda-cap", type=float, default=None)
    pr.set_defaults(fn=cmd_project)

    b = sub.add_parser("bench", help="run the benchmark grid")
    b.add_argument("--config", default=None, help="flat key = value config file")
    b.add_argument("--out", default="bench-results")
    b.add_argument("--jobs", type=int, default=None)
    b.set_defaults(fn=cmd_bench)
    return ap


def main(argv=None):
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else 0
    try:
        return args.fn(args)
    except errors.BudgetExhausted as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BUDGET
    except _NUMERICAL_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
