"""Proximal alternating predictor-corrector solver for biaffine problems."""

import math
import time
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sets
from .errors import InvalidSteps, NotBiaffine, RequiresPessimizer
from .linalg import power_iteration
from .model import BiaffineConstraint, robust_value
from .perspective import LiftedVar, r_pi_bound
from .sgsp import Certificate
from .splitting import LiftedProblem, lift_uncertainty_intersection
from .trace import Checkpoint, IterTrace, optimality_gap_ratio_value


@dataclass(frozen=True, eq=False)
class CompiledBiaffine:
    """Assembled biaffine blocks Qt_i = [Q_i d_i], qt_i = (q_i; gamma_i).

    The saddle operator [Qt_1 ... Qt_m A^T I] and its adjoint are applied
    blockwise; dense assembly exists for small cross-checks only.
    """

    c: np.ndarray
    A: np.ndarray
    b: np.ndarray
    Qt: tuple
    qt: tuple
    zsets: tuple
    radii: np.ndarray
    domain: object

    def __post_init__(self):
        object.__setattr__(self, "Qt", tuple(np.asarray(q, dtype=float) for q in self.Qt))
        object.__setattr__(self, "qt", tuple(np.asarray(q, dtype=float) for q in self.qt))

    @property
    def n(self):
        return self.c.size

    @property
    def r(self):
        return self.b.size

    @property
    def m(self):
        return len(self.Qt)

    @property
    def du_dims(self):
        return [q.size for q in self.qt]

    def y_dim(self):
        return sum(self.du_dims) + self.r + self.n

    def apply(self, u_blocks, w, pi):
        """Qbar y = sum_i Qt_i u_i + A^T w + pi."""
        out = pi.copy()
        for Qt_i, u_i in zip(self.Qt, u_blocks):
            out += Qt_i @ u_i
        if self.r:
            out += self.A.T @ w
        return out

    def adjoint(self, x):
        """Qbar^T x = (Qt_i^T x, A x, x)."""
        return [Qt_i.T @ x for Qt_i in self.Qt], (self.A @ x if self.r else np.zeros(0)), x.copy()

    def dense(self, max_entries=10**4):
        total = self.y_dim()
        if self.n * total > max_entries:
            raise ValueError("dense assembly is limited to small instances")
        out = np.zeros((self.n, total))
        k = 0
        for Qt_i, d in zip(self.Qt, self.du_dims):
            out[:, k : k + d] = Qt_i
            k += d
        if self.r:
            out[:, k : k + self.r] = self.A.T
            k += self.r
        out[:, k:] = np.eye(self.n)
        return out


def compile_biaffine(p):
    """Extract Qt_i, qt_i and the block operator data from a biaffine problem."""
    base = p.base if isinstance(p, LiftedProblem) else p
    Qt, qt, zsets = [], [], []
    for i, con in enumerate(base.constraints):
        if not isinstance(con.oracle, BiaffineConstraint):
            raise NotBiaffine(f"constraint {i} is not biaffine")
        o = con.oracle
        Qt.append(np.hstack([o.Q, o.d[:, None]]))
        qt.append(np.concatenate([o.q, [o.gamma]]))
        zsets.append(con.zset)
    radii = np.array([sets.radius_bound(con.zset, con.zdim) for con in base.constraints])
    return CompiledBiaffine(
        c=base.c, A=base.eq_A, b=base.eq_b, Qt=tuple(Qt), qt=tuple(qt),
        zsets=tuple(zsets), radii=radii, domain=base.domain,
    )


class _SplitQbar:
    """Extended saddle operator with the copy-difference blocks."""

    def __init__(self, compiled, splits):
        self.compiled = compiled
        self.splits = list(splits)
        self.du_dims = compiled.du_dims

    def y_dim(self):
        return (
            sum(d * s for d, s in zip(self.du_dims, self.splits))
            + self.compiled.r
            + self.compiled.n
        )

    def apply(self, u_all, w, pi):
        comp = self.compiled
        x_row = pi.copy()
        for Qt_i, blocks in zip(comp.Qt, u_all):
            x_row += Qt_i @ blocks[-1]
        if comp.r:
            x_row += comp.A.T @ w
        diffs = [[blocks[l] - blocks[-1] for l in range(len(blocks) - 1)] for blocks in u_all]
        return x_row, diffs

    def adjoint(self, x, omega):
        comp = self.compiled
        u_out = []
        for i, Qt_i in enumerate(comp.Qt):
            blocks = [omega[i][l].copy() for l in range(self.splits[i] - 1)]
            last = Qt_i.T @ x
            for l in range(self.splits[i] - 1):
                last -= omega[i][l]
            blocks.append(last)
            u_out.append(blocks)
        return u_out, (comp.A @ x if comp.r else np.zeros(0)), x.copy()


@dataclass
class PapcConfig:
    n_iters: int
    tau: float
    theta: np.ndarray
    theta_w: float = 1.0
    theta_pi: float = 1.0
    checkpoint_every: int = 100
    margin: float = 1e-6
    eps_stop: Optional[float] = None
    lb: Optional[float] = None
    lb_eps: float = 1e-3
    time_budget_s: Optional[float] = None
    record_iterates: bool = False
    x_star: Optional[np.ndarray] = None  # enables certificate bounds on toys
    bounds: Optional[object] = None

    def __post_init__(self):
        self.theta = np.atleast_1d(np.asarray(self.theta, dtype=float))
        if self.n_iters < 1:
            raise ValueError("n_iters must be >= 1")


@dataclass
class PapcState:
    x: np.ndarray
    u: list  # per constraint: one (d_i+1) array per factor, oracle block last
    w: np.ndarray
    pi: np.ndarray
    omega: Optional[list] = None

    @staticmethod
    def cold(compiled, splits=None):
        m = compiled.m
        splits = list(splits) if splits is not None else [1] * m
        u = [[np.zeros(compiled.du_dims[i] ) for _ in range(splits[i])] for i in range(m)]
        omega = [[np.zeros(compiled.du_dims[i]) for _ in range(splits[i] - 1)] for i in range(m)]
        return PapcState(
            x=np.zeros(compiled.n), u=u, w=np.zeros(compiled.r),
            pi=np.zeros(compiled.n), omega=omega,
        )


def _pack_dims(compiled, splits):
    return sum(d * s for d, s in zip(compiled.du_dims, splits)) + compiled.r + compiled.n


def _s_scaled_opnorm_sq(compiled, splits, tau, theta, theta_w, theta_pi, seed=0):
    """lambda_max of S^{-1/2} tau Qbar^T Qbar S^{-1/2} via power iteration."""
    du = compiled.du_dims
    m, r = compiled.m, compiled.r
    split_mode = any(s != 1 for s in splits)
    op = _SplitQbar(compiled, splits) if split_mode else None

    def unpack(y):
        u_all, k = [], 0
        for i in range(m):
            blocks = []
            for _ in range(splits[i]):
                blocks.append(y[k : k + du[i]])
                k += du[i]
            u_all.append(blocks)
        return u_all, y[k : k + r], y[k + r :]

    def pack(u_all, w, pi):
        parts = [b for blocks in u_all for b in blocks] + [w, pi]
        return np.concatenate(parts)

    sqrt_th = np.sqrt(theta)
    sw, sp = math.sqrt(theta_w), math.sqrt(theta_pi)

    def matvec(y):
        u_all, w, pi = unpack(y)
        u_s = [[sqrt_th[i] * b for b in blocks] for i, blocks in enumerate(u_all)]
        w_s, pi_s = sw * w, sp * pi
        if split_mode:
            x_row, diffs = op.apply(u_s, w_s, pi_s)
            u_back, w_back, pi_back = op.adjoint(x_row, diffs)
        else:
            x_row = compiled.apply([blocks[0] for blocks in u_s], w_s, pi_s)
            u_b, w_back, pi_back = compiled.adjoint(x_row)
            u_back = [[b] for b in u_b]
        u_out = [[sqrt_th[i] * b for b in blocks] for i, blocks in enumerate(u_back)]
        return tau * pack(u_out, sw * w_back, sp * pi_back)

    return power_iteration(matvec, _pack_dims(compiled, splits), tol=1e-8, seed=seed)


def validate_steps(compiled, cfg, splits=None):
    """True iff H = S - tau Qbar^T Qbar is PSD within the configured margin,
    tested as lambda_max(S^{-1/2} tau Qbar^T Qbar S^{-1/2}) <= 1 - margin."""
    splits = list(splits) if splits is not None else [1] * compiled.m
    lam = _s_scaled_opnorm_sq(
        compiled, splits, cfg.tau, cfg.theta, cfg.theta_w, cfg.theta_pi
    )
    return lam <= (1.0 - cfg.margin) * (1.0 + 1e-7) + 1e-12


def qbar_opnorm_sq(compiled, splits=None, seed=0):
    """lambda_max(Qbar^T Qbar) (unit dual scalings)."""
    splits = list(splits) if splits is not None else [1] * compiled.m
    return _s_scaled_opnorm_sq(compiled, splits, 1.0, np.ones(compiled.m), 1.0, 1.0, seed)


def default_config(compiled, n_iters, splits=None, margin=1e-6, **kwargs):
    """Unit dual steps and tau = (1 - margin) / lambda_max(Qbar^T Qbar)."""
    lam = qbar_opnorm_sq(compiled, splits)
    tau = (1.0 - margin) / max(lam, 1e-12)
    return PapcConfig(
        n_iters=n_iters, tau=tau, theta=np.ones(compiled.m), theta_w=1.0,
        theta_pi=1.0, margin=margin, **kwargs,
    )


def papc_run(compiled, domain=None, cfg=None, start=None, pessimizer=None):
    """Predictor-corrector iteration on the biaffine saddle problem.

    One step: predictor p = x - tau (c + Qbar y); dual blocks project onto
    the uncapped cones, w takes the unprojected multiplier step, pi the
    support-function prox; the corrector repeats the x step at the updated
    duals.  Ergodic averages are uniform.
    """
    domain = compiled.domain if domain is None else domain
    splits = [1] * compiled.m
    factors = [(z,) for z in compiled.zsets]
    return _engine(compiled, splits, factors, None, domain, cfg, start, pessimizer)


def papc_run_split(lifted, cfg=None, start=None, pessimizer=None):
    """Split-dual PAPC with omega predictors/correctors for the set copies."""
    if not isinstance(lifted, LiftedProblem):
        lifted = lift_uncertainty_intersection(lifted)
    compiled = compile_biaffine(lifted.base)
    return _engine(
        compiled, lifted.splits, lifted.factors, lifted, lifted.base.domain, cfg, start,
        pessimizer,
    )


def _engine(compiled, splits, factors, lifted, domain, cfg, start, pessimizer=None):
    m, n, r = compiled.m, compiled.n, compiled.r
    cone_specs = [[sets.ConeLiftSpec(f, math.inf) for f in facs] for facs in factors]

    if cfg is None:
        cfg = default_config(compiled, n_iters=1000, splits=splits)
    if not validate_steps(compiled, cfg, splits):
        raise InvalidSteps("H = S - tau Qbar^T Qbar is not positive semidefinite")

    state = start if start is not None else PapcState.cold(compiled, splits)
    x = np.asarray(state.x, dtype=float).copy()
    u = [[np.asarray(b, dtype=float).copy() for b in blocks] for blocks in state.u]
    w = np.asarray(state.w, dtype=float).copy()
    pi = np.asarray(state.pi, dtype=float).copy()
    omega = (
        [[np.asarray(b, dtype=float).copy() for b in blocks] for blocks in state.omega]
        if state.omega is not None
        else [[np.zeros(compiled.du_dims[i]) for _ in range(splits[i] - 1)] for i in range(m)]
    )

    x0, w0, pi0 = x.copy(), w.copy(), pi.copy()
    lam0 = np.array([blocks[-1][-1] for blocks in u]) if m else np.zeros(0)

    cert_ctx = None
    if cfg.x_star is not None and cfg.bounds is not None:
        cert_ctx = _cert_context(compiled, splits, cfg, x0, w0, lam0)

    acc_x = np.zeros(n)
    acc_u = [np.zeros(compiled.du_dims[i]) for i in range(m)]
    acc_w = np.zeros(r)
    acc_wt = 0.0
    iterates = np.empty((cfg.n_iters, n)) if cfg.record_iterates else None

    trace = IterTrace()
    t0 = time.perf_counter()
    status = "ok"
    k_done = 0
    tau = cfg.tau

    for k in range(1, cfg.n_iters + 1):
        p_x = x - tau * (compiled.apply([blocks[-1] for blocks in u], w, pi) + compiled.c)
        p_om = [
            [omega[i][l] - tau * (u[i][l] - u[i][-1]) for l in range(splits[i] - 1)]
            for i in range(m)
        ]

        u_new = []
        for i in range(m):
            blocks = []
            for l in range(splits[i] - 1):
                cand = u[i][l] + cfg.theta[i] * p_om[i][l]
                zt, lm = sets.project_cone_lift(cone_specs[i][l], (cand[:-1], cand[-1]))
                blocks.append(np.concatenate([zt, [lm]]))
            grad = compiled.Qt[i].T @ p_x + compiled.qt[i]
            for l in range(splits[i] - 1):
                grad = grad - p_om[i][l]
            cand = u[i][-1] + cfg.theta[i] * grad
            zt, lm = sets.project_cone_lift(cone_specs[i][-1], (cand[:-1], cand[-1]))
            blocks.append(np.concatenate([zt, [lm]]))
            u_new.append(blocks)
        w_new = w + cfg.theta_w * (compiled.A @ p_x - compiled.b) if r else w
        pi_new = sets.prox_support(domain, cfg.theta_pi, pi + cfg.theta_pi * p_x)

        x_new = x - tau * (
            compiled.apply([blocks[-1] for blocks in u_new], w_new, pi_new) + compiled.c
        )
        om_new = [
            [omega[i][l] - tau * (u_new[i][l] - u_new[i][-1]) for l in range(splits[i] - 1)]
            for i in range(m)
        ]

        x, u, w, pi, omega = x_new, u_new, w_new, pi_new, om_new

        acc_x += x
        for i in range(m):
            acc_u[i] += u[i][-1]
        if r:
            acc_w += w
        acc_wt += 1.0
        if cfg.record_iterates:
            iterates[k - 1] = x
        k_done = k

        if (k % cfg.checkpoint_every == 0) or k == cfg.n_iters:
            xbar = acc_x / acc_wt
            obj = float(compiled.c @ xbar)
            fg = _feasibility(compiled, lifted, xbar, pessimizer)
            cb = cert_ctx.bound_feas(k) if cert_ctx is not None else float("nan")
            ogr = float("nan")
            if cfg.lb is not None:
                ogr = optimality_gap_ratio_value(obj, fg, cfg.lb, cfg.lb_eps)
            trace.checkpoints.append(Checkpoint(k, time.perf_counter() - t0, obj, fg, ogr, cb))
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
        trace.weights = np.ones(k_done)
    ubar = [LiftedVar(acc_u[i][:-1] / acc_wt, acc_u[i][-1] / acc_wt) for i in range(m)]
    trace.extras.update(
        {
            "final_state": PapcState(x=x, u=u, w=w, pi=pi, omega=omega),
            "u_bar": ubar,
            "w_bar": acc_w / acc_wt if r else np.zeros(0),
            "lambda_bar_erg": np.array([uu.lam for uu in ubar]),
            "x0": x0,
            "w0": w0,
            "pi0": pi0,
            "lam0": lam0,
            "cert_ctx": cert_ctx,
            "compiled": compiled,
            "domain": domain,
            "x_unlifted": lifted.unlift_x(xbar) if lifted is not None else xbar,
        }
    )
    return trace


def _feasibility(compiled, lifted, x, pessimizer=None):
    """max_i f_i(x) combined with the worst equality violation."""
    try:
        if pessimizer is not None:
            vals = list(pessimizer(x))
        elif lifted is not None:
            vals = [robust_value(con, x)[0] for con in lifted.base.constraints]
        else:
            vals = []
            for Qt_i, qt_i, zset in zip(compiled.Qt, compiled.qt, compiled.zsets):
                y = Qt_i[:, :-1].T @ x + qt_i[:-1]
                vals.append(sets.support_value(zset, y) + float(Qt_i[:, -1] @ x) + qt_i[-1])
    except RequiresPessimizer:
        return float("nan")
    fg = max(vals) if vals else -math.inf
    if compiled.r:
        fg = max(fg, float(np.max(np.abs(compiled.A @ x - compiled.b))))
    return float(fg)


class _CertContext:
    def __init__(self, c_glob, d_feas, d_opt, theta_pi, alpha, r_pi):
        self.c_glob = c_glob
        self.d_feas = d_feas
        self.d_opt = d_opt
        self.theta_pi = theta_pi
        self.alpha = alpha
        self.r_pi = r_pi

    def bound_feas(self, k):
        extra = (1.0 + (1.0 + self.alpha) ** 2) / self.theta_pi
        return self.c_glob / (2.0 * k) * (self.d_feas + extra)

    def bound_opt(self, k):
        extra = (1.0 + self.r_pi**2) / self.theta_pi
        return self.c_glob / (2.0 * k) * (self.d_opt + extra)


def _cert_context(compiled, splits, cfg, x0, w0, lam0, alpha=1.0):
    if any(s != 1 for s in splits):
        raise ValueError("certificates are provided for unsplit runs only")
    bounds = cfg.bounds
    radii = compiled.radii
    c_glob = max([2.0] + [1.0 + 4.0 * r_i**2 for r_i in radii])
    dx = float(np.sum((np.asarray(cfg.x_star, dtype=float) - x0) ** 2)) / cfg.tau
    lam_b = bounds.lambda_bar
    d_feas = dx + sum(
        max(lam_b + 1.0, lam0[i]) ** 2 / cfg.theta[i] for i in range(compiled.m)
    )
    d_opt = dx + sum(
        max(2.0 * lam_b, lam0[i]) ** 2 / cfg.theta[i] for i in range(compiled.m)
    )
    if compiled.r:
        w0n = float(np.linalg.norm(w0))
        d_feas += max(bounds.r_w + 1.0, w0n) ** 2 / cfg.theta_w
        d_opt += max(2.0 * bounds.r_w, w0n) ** 2 / cfg.theta_w
    r_pi = r_pi_bound(compiled, bounds)
    return _CertContext(c_glob, d_feas, d_opt, cfg.theta_pi, alpha, r_pi)


def certify_papc(trace, alpha=1.0):
    """Measured feasibility (with the alpha-weighted domain distance) versus
    the predictor-corrector bound at the executed iteration count."""
    ctx = trace.extras.get("cert_ctx")
    if ctx is None:
        raise ValueError("run with x_star and bounds set to enable certificates")
    compiled = trace.extras["compiled"]
    domain = trace.extras["domain"]
    xbar = trace.x
    measured = 0.0
    for Qt_i, qt_i, zset in zip(compiled.Qt, compiled.qt, compiled.zsets):
        y = Qt_i[:, :-1].T @ xbar + qt_i[:-1]
        val = sets.support_value(zset, y) + float(Qt_i[:, -1] @ xbar) + qt_i[-1]
        measured += max(val, 0.0)
    if compiled.r:
        measured += float(np.linalg.norm(compiled.A @ xbar - compiled.b))
    measured += alpha * float(
        np.linalg.norm(xbar - sets.project_simple(domain, xbar))
    )
    k = trace.n_iters
    return Certificate(
        measured=measured, bound_feasibility=ctx.bound_feas(k),
        bound_optimality=ctx.bound_opt(k), ok=measured <= ctx.bound_feas(k),
    )
