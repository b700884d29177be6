"""Subgradient saddle-point solver (simple and split forms), Slater point
search, ergodic averaging and convergence certificates."""

import math
import time
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np

from . import sets
from .errors import BudgetExhausted, RequiresPessimizer
from .model import RobustProblem, pad_constraint, robust_value
from .perspective import (
    DualBounds,
    LiftedVar,
    SlaterCertificate,
    default_v_lower,
    dual_bounds,
    estimate_interior_radius,
    set_radii,
)
from .splitting import LiftedProblem, lift_uncertainty_intersection
from .trace import Checkpoint, IterTrace, optimality_gap_ratio_value


@dataclass(frozen=True)
class TheoremScaled:
    """Constant steps tau_tilde/sqrt(N) per block; constants auto-balanced
    from estimated subgradient norms when left unset."""

    tau: Optional[float] = None
    theta: Optional[np.ndarray] = None
    theta_w: Optional[float] = None


@dataclass(frozen=True)
class AdaptiveNormalized:
    """Per-block steps base / (||subgradient|| sqrt(k))."""

    base: float = 2.0


@dataclass
class SgspConfig:
    n_iters: int
    step_policy: Union[TheoremScaled, AdaptiveNormalized] = field(default_factory=TheoremScaled)
    averaging: str = "auto"  # uniform | step_weighted | auto
    checkpoint_every: int = 100
    time_budget_s: Optional[float] = None
    eps_stop: Optional[float] = None
    lb: Optional[float] = None
    lb_eps: float = 1e-3
    record_iterates: bool = False
    seed: int = 0
    n_constant_samples: int = 1000
    objective_fn: Optional[object] = None  # checkpoint objective; default c^T x

    def __post_init__(self):
        if self.n_iters < 1:
            raise ValueError("n_iters must be >= 1")
        if self.checkpoint_every < 1:
            raise ValueError("checkpoint_every must be >= 1")


@dataclass
class SaddleState:
    x: np.ndarray
    u: list  # list of LiftedVar per constraint (last factor block when split)
    w: np.ndarray
    u_extra: Optional[list] = None  # split copies u_{i,l}, l < s_i
    omega: Optional[list] = None

    @staticmethod
    def cold(p):
        base = p.base if isinstance(p, LiftedProblem) else p
        x0 = sets.project_simple(base.domain, np.zeros(base.n))
        u0 = [LiftedVar(np.zeros(con.zdim), 0.0) for con in base.constraints]
        return SaddleState(x=x0, u=u0, w=np.zeros(base.r))


@dataclass
class ConvergenceConstants:
    g_x: float
    g_i: np.ndarray
    g_w: float
    phi: float = float("nan")
    sigma_i: Optional[np.ndarray] = None

    def __post_init__(self):
        self.g_i = np.atleast_1d(np.asarray(self.g_i, dtype=float))
        if self.sigma_i is not None:
            self.sigma_i = np.atleast_1d(np.asarray(self.sigma_i, dtype=float))


@dataclass
class Certificate:
    measured: float
    bound_feasibility: float
    bound_optimality: float
    ok: bool


def _as_lifted(p):
    if isinstance(p, LiftedProblem):
        return p
    lifted = lift_uncertainty_intersection(p)
    if any(s != 1 for s in lifted.splits):
        raise ValueError("intersection uncertainty sets require sgsp_run_split")
    return lifted


def _factor_radii(lifted):
    return [
        [sets.radius_bound(f, con.zdim) for f in facs]
        for con, facs in zip(lifted.base.constraints, lifted.factors)
    ]


def estimate_constants(lifted, bounds, omega_specs=None, n_samples=1000, seed=0):
    """Sampled bounds on the subgradient norms used by the scaled steps.

    G_w = ||A|| R_x + ||b|| is exact; G_x and the per-constraint G_i are the
    maxima over feasible samples of the corresponding subgradient norms.
    """
    base = lifted.base
    rng = np.random.default_rng(seed)
    n, r, m = base.n, base.r, base.m
    lam_bar = bounds.lambda_bar
    r_x = sets.radius_bound(base.domain, n)
    g_w = float(np.linalg.norm(base.eq_A, 2)) * r_x + float(np.linalg.norm(base.eq_b)) if r else 0.0

    g_x = float(np.linalg.norm(base.c))
    g_i = np.zeros(m)
    splits = lifted.splits
    for _ in range(n_samples):
        x = sets.sample_point(base.domain, n, rng)
        v_x = base.c.copy()
        if r:
            w = rng.standard_normal(r)
            nw = np.linalg.norm(w)
            if nw > 0:
                w *= (bounds.r_w + 1.0) * rng.uniform() / nw
            v_x = v_x + base.eq_A.T @ w
        for i, con in enumerate(base.constraints):
            lam = rng.uniform(0.0, lam_bar) if lam_bar > 0 else 0.0
            z = sets.sample_point(con.zset, con.zdim, rng)
            g, dxg, dz = con.oracle.evaluate_all(x, z)
            dz = np.asarray(dz, dtype=float)
            v_x = v_x + lam * np.asarray(dxg, dtype=float)
            du = np.concatenate([dz, [-float(g) - float(z @ dz)]])
            norm_sq = 0.0
            if omega_specs is not None and splits[i] > 1:
                for spec in omega_specs[i]:
                    nu = rng.standard_normal(con.zdim)
                    mu = -rng.uniform(0.0, spec.mu_bar if np.isfinite(spec.mu_bar) else 1.0)
                    nn = np.linalg.norm(nu)
                    if nn > 0:
                        nu *= (-mu / spec.eps) * rng.uniform() / nn
                    om = np.concatenate([nu, [mu]])
                    du = du + om
                    norm_sq += float(om @ om)
            norm_sq += float(du @ du)
            g_i[i] = max(g_i[i], math.sqrt(norm_sq))
        g_x = max(g_x, float(np.linalg.norm(v_x)))
    radii = _factor_radii(lifted)
    sigma = np.array([sum(1.0 + 4.0 * r_il**2 for r_il in rs) for rs in radii]) if m else np.zeros(0)
    return ConvergenceConstants(g_x=g_x, g_i=g_i, g_w=g_w, sigma_i=sigma)


def _resolve_theorem_steps(policy, consts, bounds, state, r, m, r_x):
    lam_bar = bounds.lambda_bar
    if policy.tau is not None:
        tau = float(policy.tau)
    else:
        a_x = 2.0 * max(float(state.x @ state.x), r_x**2)
        tau = math.sqrt(max(a_x, 1e-12)) / max(consts.g_x, 1e-12)
    # dual steps run 2x hotter than the balance point: the ergodic iterate
    # then settles on the feasible side of the constraint boundary
    if policy.theta is not None:
        theta = np.broadcast_to(np.asarray(policy.theta, dtype=float), (m,)).copy()
    else:
        lam0 = np.array([u.lam for u in state.u]) if m else np.zeros(0)
        theta = 2.0 * np.maximum(lam_bar + 1.0, lam0) / np.maximum(consts.g_i, 1e-12)
    if policy.theta_w is not None:
        theta_w = float(policy.theta_w)
    else:
        theta_w = 2.0 * (bounds.r_w + 1.0) / max(consts.g_w, 1e-12) if r else 1.0
    return tau, theta, theta_w


def _checkpoint_feasibility(base, x, pessimizer):
    """max_i f_i(x), combined with the worst equality violation."""
    vals = []
    try:
        if pessimizer is not None:
            vals = list(pessimizer(x))
        else:
            vals = [robust_value(con, x)[0] for con in base.constraints]
    except RequiresPessimizer:
        return float("nan")
    fg = max(vals) if vals else -math.inf
    if base.r:
        fg = max(fg, float(np.max(np.abs(base.eq_A @ x - base.eq_b))))
    return float(fg)


def _scaled_bound_terms(lifted, bounds, consts, steps, state0, kind):
    """D and phi of the scaled-step bound; kind is 'feas' or 'opt'."""
    base = lifted.base
    tau, theta, theta_w = steps
    lam_bar = bounds.lambda_bar
    r_x = sets.radius_bound(base.domain, base.n)
    x0_sq = float(state0.x @ state0.x)
    split = any(s != 1 for s in lifted.splits)
    d_x = (r_x + math.sqrt(x0_sq)) ** 2 / tau if split else 2.0 * max(x0_sq, r_x**2) / tau
    lam0 = np.array([u.lam for u in state0.u]) if base.m else np.zeros(0)
    lam_ref = lam_bar + 1.0 if kind == "feas" else 2.0 * lam_bar
    d_u = 0.0
    for i, s_i in enumerate(lifted.splits):
        mult = consts.sigma_i[i] if split else 1.0
        d_u += mult * max(lam_ref, lam0[i]) ** 2 / theta[i]
    w0 = float(np.linalg.norm(state0.w)) if base.r else 0.0
    w_ref = bounds.r_w + 1.0 if kind == "feas" else 2.0 * bounds.r_w
    d_w = max(w_ref, w0) ** 2 / theta_w if base.r else 0.0

    phi = tau * consts.g_x**2 + float(theta @ (consts.g_i**2)) + theta_w * consts.g_w**2
    if split:
        # extra omega-radius term of the split analysis
        extra = 0.0
        if lifted.omega_specs:
            for specs in lifted.omega_specs:
                for sp in specs:
                    extra += sp.mu_bar * (1.0 + 1.0 / sp.eps)
        phi += 4.0 * extra**2 / tau

    radii = _factor_radii(lifted)
    c_glob = max([2.0] + [1.0 + 4.0 * r_il**2 for rs in radii for r_il in rs])
    return c_glob, d_x + d_u + d_w, phi


def _bound_at(c_glob, d_term, phi, n_total, k):
    return 0.5 * c_glob * (math.sqrt(n_total) * d_term / k + phi / math.sqrt(n_total))


def sgsp_run(p, bounds, cfg, start=None, pessimizer=None):
    """Run the subgradient saddle-point algorithm on a simple-set problem.

    Per iteration, from the previous state: x and each lifted dual block step
    along their subgradients and are projected back onto X and the capped
    cones; the equality multiplier w steps along Ax - b inside its ball.  The
    returned trace's x is the ergodic average.
    """
    lifted = _as_lifted(p)
    return _engine(lifted, bounds, None, cfg, start, pessimizer)


def sgsp_run_split(lifted, bounds, omega_specs, cfg, start=None, pessimizer=None):
    """Split-form SGSP with duplicated dual blocks and omega couplings."""
    if omega_specs is not None:
        lifted = LiftedProblem(
            base=lifted.base, x_copies=lifted.x_copies, factors=lifted.factors,
            omega_specs=tuple(tuple(s) for s in omega_specs), n_orig=lifted.n_orig,
        )
    return _engine(lifted, bounds, lifted.omega_specs, cfg, start, pessimizer)


def _engine(lifted, bounds, omega_specs, cfg, start=None, pessimizer=None):
    base = lifted.base
    n, r, m = base.n, base.r, base.m
    splits = lifted.splits
    split_mode = any(s != 1 for s in splits)
    if split_mode and omega_specs is None:
        raise ValueError("omega_specs are required for split runs")

    cap = bounds.lambda_bar if bounds.lambda_bar > 0 else math.inf
    cone_specs = [
        [sets.ConeLiftSpec(f, cap) for f in facs] for facs in lifted.factors
    ]
    w_radius = bounds.r_w + 1.0

    state0 = start if start is not None else SaddleState.cold(base)
    x = np.asarray(state0.x, dtype=float).copy()
    u_last = [uu.as_array() for uu in state0.u]
    u_extra = (
        [[a.as_array() for a in blocks] for blocks in state0.u_extra]
        if state0.u_extra is not None
        else [[u_last[i].copy() for _ in range(splits[i] - 1)] for i in range(m)]
    )
    omega = (
        [[np.asarray(a, dtype=float).copy() for a in blocks] for blocks in state0.omega]
        if state0.omega is not None
        else [[np.zeros(base.constraints[i].zdim + 1) for _ in range(splits[i] - 1)] for i in range(m)]
    )
    w = np.asarray(state0.w, dtype=float).copy()

    policy = cfg.step_policy
    theorem = isinstance(policy, TheoremScaled)
    consts = None
    steps = None
    if theorem:
        r_x = sets.radius_bound(base.domain, n)
        if not np.isfinite(r_x):
            raise ValueError("scaled steps require a bounded domain")
        consts = estimate_constants(lifted, bounds, omega_specs, cfg.n_constant_samples, cfg.seed)
        tau_t, theta_t, theta_w_t = _resolve_theorem_steps(policy, consts, bounds, state0, r, m, r_x)
        rootN = math.sqrt(cfg.n_iters)
        steps = (tau_t, theta_t, theta_w_t)
        consts.phi = tau_t * consts.g_x**2 + float(theta_t @ (consts.g_i**2)) + theta_w_t * consts.g_w**2
        c_glob, d_term_f, phi_f = _scaled_bound_terms(lifted, bounds, consts, steps, state0, "feas")

    averaging = cfg.averaging
    if averaging == "auto":
        averaging = "uniform" if theorem else "step_weighted"

    acc_x = np.zeros(n)
    acc_u = [np.zeros(base.constraints[i].zdim + 1) for i in range(m)]
    acc_w = np.zeros(r)
    acc_wt = 0.0

    iterates = np.empty((cfg.n_iters, n)) if cfg.record_iterates else None
    weights = np.empty(cfg.n_iters) if cfg.record_iterates else None

    trace = IterTrace()
    t0 = time.perf_counter()
    status = "ok"
    k_done = 0
    gmax_x, gmax_w = 0.0, 0.0
    gmax_u = np.zeros(m)

    for k in range(1, cfg.n_iters + 1):
        # subgradients at the previous state (all blocks update in parallel)
        v_x = base.c.copy()
        if r:
            v_x += base.eq_A.T @ w
        du_last = []
        for i, con in enumerate(base.constraints):
            ui = u_last[i]
            lam = ui[-1]
            z = ui[:-1] / lam if lam > 0.0 else np.zeros(con.zdim)
            g, dxg, dz = con.oracle.evaluate_all(x, z)
            if lam > 0.0:
                v_x += lam * np.asarray(dxg, dtype=float)
            du = np.concatenate([np.asarray(dz, dtype=float), [-float(g) - float(z @ dz)]])
            if splits[i] > 1:
                du = du + np.sum(omega[i], axis=0)
            du_last.append(du)

        if theorem:
            tau_k = steps[0] / rootN
            theta_k = steps[1] / rootN
            theta_w_k = steps[2] / rootN
        else:
            # norms floored at 1% of their running max so steps and averaging
            # weights stay finite when a block's subgradient passes through 0
            sq = math.sqrt(k)
            v_chi_sq = float(v_x @ v_x)
            if split_mode:
                for i in range(m):
                    for l in range(splits[i] - 1):
                        d = u_extra[i][l] - u_last[i]
                        v_chi_sq += float(d @ d)
            gmax_x = max(gmax_x, math.sqrt(v_chi_sq))
            tau_k = policy.base / (max(math.sqrt(v_chi_sq), 0.01 * gmax_x, 1e-12) * sq)
            theta_k = np.empty(m)
            for i in range(m):
                nrm_sq = float(du_last[i] @ du_last[i])
                for l in range(splits[i] - 1):
                    nrm_sq += float(omega[i][l] @ omega[i][l])
                gmax_u[i] = max(gmax_u[i], math.sqrt(nrm_sq))
                theta_k[i] = policy.base / (max(math.sqrt(nrm_sq), 0.01 * gmax_u[i], 1e-12) * sq)
            if r:
                res = base.eq_A @ x - base.eq_b
                nres = float(np.linalg.norm(res))
                gmax_w = max(gmax_w, nres)
                theta_w_k = policy.base / (max(nres, 0.01 * gmax_w, 1e-12) * sq)
            else:
                theta_w_k = 0.0

        x_new = sets.project_simple(base.domain, x - tau_k * v_x)
        u_last_new = []
        u_extra_new = []
        omega_new = []
        for i in range(m):
            s_i = splits[i]
            th = theta_k[i]
            zt, lm = sets.project_cone_lift(
                cone_specs[i][s_i - 1], (u_last[i][:-1] - th * du_last[i][:-1],
                                         u_last[i][-1] - th * du_last[i][-1]),
            )
            u_last_new.append(np.concatenate([zt, [lm]]))
            blocks_u = []
            blocks_o = []
            for l in range(s_i - 1):
                cand = u_extra[i][l] + th * omega[i][l]
                zt2, lm2 = sets.project_cone_lift(cone_specs[i][l], (cand[:-1], cand[-1]))
                blocks_u.append(np.concatenate([zt2, [lm2]]))
                diff = u_extra[i][l] - u_last[i]
                oc = omega[i][l] - tau_k * diff
                nu_p, mu_p = sets.project_omega(omega_specs[i][l], (oc[:-1], oc[-1]))
                blocks_o.append(np.concatenate([nu_p, [mu_p]]))
            u_extra_new.append(blocks_u)
            omega_new.append(blocks_o)
        if r:
            w_cand = w + theta_w_k * (base.eq_A @ x - base.eq_b)
            nw = float(np.linalg.norm(w_cand))
            w_new = w_cand if nw <= w_radius else (w_radius / nw) * w_cand
        else:
            w_new = w

        x, u_last, u_extra, omega, w = x_new, u_last_new, u_extra_new, omega_new, w_new

        wt = 1.0 if averaging == "uniform" else tau_k
        acc_x += wt * x
        for i in range(m):
            acc_u[i] += wt * u_last[i]
        if r:
            acc_w += wt * w
        acc_wt += wt
        if cfg.record_iterates:
            iterates[k - 1] = x
            weights[k - 1] = wt
        k_done = k

        at_checkpoint = (k % cfg.checkpoint_every == 0) or k == cfg.n_iters
        if at_checkpoint:
            xbar = acc_x / acc_wt
            obj = float(cfg.objective_fn(xbar)) if cfg.objective_fn else float(base.c @ xbar)
            fg = _checkpoint_feasibility(base, xbar, pessimizer)
            cb = _bound_at(c_glob, d_term_f, phi_f, cfg.n_iters, k) if theorem else float("nan")
            ogr = float("nan")
            if cfg.lb is not None:
                ogr = optimality_gap_ratio_value(obj, fg, cfg.lb, cfg.lb_eps)
            trace.checkpoints.append(
                Checkpoint(k, time.perf_counter() - t0, obj, fg, ogr, cb)
            )
            if cfg.eps_stop is not None and fg == fg and fg <= cfg.eps_stop:
                break
            if cfg.time_budget_s is not None and time.perf_counter() - t0 > cfg.time_budget_s:
                status = "time_budget"
                break

    xbar = acc_x / acc_wt
    trace.x = xbar
    trace.status = status
    trace.n_iters = k_done
    if cfg.record_iterates:
        trace.iterates = iterates[:k_done]
        trace.weights = weights[:k_done]
    ubar = [LiftedVar(acc_u[i][:-1] / acc_wt, acc_u[i][-1] / acc_wt) for i in range(m)]
    trace.extras.update(
        {
            "u_bar": ubar,
            "w_bar": acc_w / acc_wt if r else np.zeros(0),
            "lambda_bar_erg": np.array([uu.lam for uu in ubar]),
            "x0": np.asarray(state0.x, dtype=float),
            "w0": np.asarray(state0.w, dtype=float),
            "lam0": np.array([uu.lam for uu in state0.u]) if m else np.zeros(0),
            "constants": consts,
            "steps": steps,
            "n_planned": cfg.n_iters,
            "lifted": lifted,
            "x_unlifted": lifted.unlift_x(xbar),
        }
    )
    return trace


def ergodic_average(trace, mode="uniform"):
    """Average of the recorded iterates: (1/N) sum x_k, or step-weighted."""
    if trace.iterates is None:
        raise ValueError("trace was run without record_iterates")
    xs = trace.iterates
    if mode in ("uniform", "Uniform"):
        return xs.mean(axis=0)
    w = trace.weights
    return (xs * w[:, None]).sum(axis=0) / w.sum()


def certify(trace, p, bounds, consts=None):
    """Scaled-step certificate: measured feasibility versus the bound.

    measured = sum_i [f_i(x_bar)]_+ + ||A x_bar - b||; the bound is evaluated
    with the run's constants at the executed iteration count.  Requires the
    run to have used the scaled policy.
    """
    if trace.extras.get("steps") is None:
        raise ValueError("certificates require the scaled step policy")
    lifted = trace.extras["lifted"]
    base = lifted.base
    if consts is None:
        consts = trace.extras["constants"]
    xbar = trace.x
    vals = []
    for con in base.constraints:
        vals.append(robust_value(con, xbar)[0])
    measured = float(sum(max(v, 0.0) for v in vals))
    if base.r:
        measured += float(np.linalg.norm(base.eq_A @ xbar - base.eq_b))

    state0 = SaddleState(
        x=trace.extras["x0"],
        u=[LiftedVar(np.zeros(con.zdim), l0) for con, l0 in zip(base.constraints, trace.extras["lam0"])],
        w=trace.extras["w0"],
    )
    steps = trace.extras["steps"]
    n_planned = trace.extras["n_planned"]
    c_glob, d_f, phi_f = _scaled_bound_terms(lifted, bounds, consts, steps, state0, "feas")
    c_glob, d_o, phi_o = _scaled_bound_terms(lifted, bounds, consts, steps, state0, "opt")
    k = trace.n_iters
    bf = _bound_at(c_glob, d_f, phi_f, n_planned, k)
    bo = _bound_at(c_glob, d_o, phi_o, n_planned, k)
    return Certificate(measured=measured, bound_feasibility=bf, bound_optimality=bo,
                       ok=measured <= bf)


def slater_search(p, x0, delta=1e-2, budget=100000, v_lower=None, cfg_seed=0,
                  pessimizer=None, refine_rounds=3):
    """Find a strictly feasible interior point by solving the epigraph
    problem min t s.t. f_i(x) <= t with doubling inner SGSP budgets.

    The search stops once max_i f_i < 0; up to ``refine_rounds`` further
    doubling rounds then deepen the point (a smaller max_i f_i sharpens the
    dual bounds derived from the certificate).  Returns the certificate with
    the measured f_i values, an estimated interior radius and a strict lower
    bound on the optimal value.
    """
    x0 = np.asarray(x0, dtype=float)

    def f_of(x):
        if pessimizer is not None:
            return np.asarray(pessimizer(x), dtype=float)
        return np.array([robust_value(con, x)[0] for con in p.constraints])

    def certificate(x_hat, f_hat):
        eps_hat = estimate_interior_radius(p, x_hat, f_of=f_of)
        vl = v_lower if v_lower is not None else default_v_lower(p)
        return SlaterCertificate(x_hat=x_hat, f_hat=f_hat, eps_hat=eps_hat, v_lower=vl)

    f0 = f_of(x0)
    t0 = float(np.max(f0)) if f0.size else -1.0
    if t0 < 0.0:
        return certificate(x0, f0)

    t_bar = t0 + delta
    x_cur = x0
    t_cur = t0 + delta
    u_carry = None
    spent = 0
    k_inner = 2
    best = None  # (t, x, f) once strictly feasible
    rounds_after = 0
    while spent < budget:
        k_run = min(k_inner, max(budget - spent, 1))
        aux = _slater_aux_problem(p, t_bar)
        aux_cert = _slater_aux_certificate(p, aux, x0, f0, t0, delta)
        aux_bounds = dual_bounds(aux, aux_cert)
        start = SaddleState(
            x=np.concatenate([x_cur, [min(t_cur, t_bar)]]),
            u=(
                u_carry
                if u_carry is not None
                else [LiftedVar(np.zeros(con.zdim), 0.0) for con in aux.constraints]
            ),
            w=np.zeros(aux.r),
        )
        # adaptive inner steps: the search needs feasibility, not certificates
        cfg = SgspConfig(
            n_iters=k_run,
            step_policy=AdaptiveNormalized(),
            checkpoint_every=max(k_run, 1),
            seed=cfg_seed,
            n_constant_samples=200,
        )
        tr = sgsp_run(aux, aux_bounds, cfg, start=start)
        spent += k_run
        # mix the round's (interior) start into the average so candidates
        # stay in int(X)
        x_cand = (x_cur + k_run * tr.x[:-1]) / (k_run + 1)
        f_cand = f_of(x_cand)
        t_meas = float(np.max(f_cand))
        if t_meas < 0.0 and (best is None or t_meas < best[0]):
            best = (t_meas, x_cand, f_cand)
        if best is not None:
            rounds_after += 1
            if rounds_after > refine_rounds:
                break
        t_bar = min(t_bar, t_meas + delta)
        x_cur, t_cur = x_cand, t_meas
        u_carry = tr.extras["u_bar"]
        k_inner *= 2
    if best is not None:
        return certificate(best[1], best[2])
    raise BudgetExhausted(
        "no strictly feasible point found; the robust problem may have no Slater point"
    )


def _slater_aux_problem(p, t_bar):
    n = p.n
    cons = [pad_constraint(con, 0, 1, t_coeff=-1.0, n_orig=n) for con in p.constraints]
    c_aux = np.zeros(n + 1)
    c_aux[-1] = 1.0
    domain = sets.Product((p.domain, sets.Box([-1.0], [max(t_bar, -0.5)])), (n, 1))
    A_aux = np.hstack([p.eq_A, np.zeros((p.r, 1))]) if p.r else None
    return RobustProblem(c_aux, domain, tuple(cons), A_aux, p.eq_b if p.r else None)


def _slater_aux_certificate(p, aux, x0, f0, t0, delta):
    x_hat = np.concatenate([x0, [t0 + delta]])
    f_hat = f0 - (t0 + delta)
    return SlaterCertificate(x_hat=x_hat, f_hat=f_hat, eps_hat=delta / 2.0,
                             v_lower=-1.0 - delta)
