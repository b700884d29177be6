"""Desk-scale robust quadratic programming benchmark.

Instances follow the sampling protocol: entries of the norm matrices and the
linear terms are uniform on [-1, 1], the constant is fixed at -0.05, and the
stacked norm matrices / linear terms are spectrally / l2 normalized.  The
constraint functions

    g_i(x, z) = ||(P_i0 + sum_k P_ik z_k) x||^2 + b_i^T x + c_i

are convex in z, so pessimization over the unit ball is a trust-region
subproblem; an eigenvalue shift makes them concave in z with the same
supremum, which is the form the saddle-point solvers consume.
"""

import math
import time
from dataclasses import dataclass

import numpy as np

from . import sets
from .errors import MasterFailure, NoConvergence, NotBiaffine, UnsupportedSet
from .linalg import lambda_max_sym
from .model import (
    BiaffineConstraint,
    Constraint,
    GeneralOracle,
    RobustProblem,
    epigraph_lift,
    robust_value,
)
from .sets import L2Ball
from .trace import Checkpoint, IterTrace, optimality_gap_ratio_value


def lambda_max(mat, tol=1e-9):
    """Largest eigenvalue of a symmetric matrix (shifted power iteration)."""
    return lambda_max_sym(mat, tol=tol)


@dataclass(frozen=True, eq=False)
class QpInstance:
    """Sampled robust QP data; index 0 is the uncertain objective."""

    P: np.ndarray  # (m+1, K+1, L, n)
    b: np.ndarray  # (m+1, n)
    c_const: np.ndarray  # (m+1,)
    seed: int

    @property
    def n(self):
        return self.P.shape[3]

    @property
    def K(self):
        return self.P.shape[1] - 1

    @property
    def L(self):
        return self.P.shape[2]

    @property
    def m(self):
        return self.P.shape[0] - 1

    def coeff_matrix(self, i, z):
        """B(z) = P_i0 + sum_k P_ik z_k."""
        return self.P[i, 0] + np.einsum("k,kln->ln", np.asarray(z, dtype=float), self.P[i, 1:])

    def g_eval(self, i, x, z):
        Bx = self.coeff_matrix(i, z) @ x
        return float(Bx @ Bx + self.b[i] @ x + self.c_const[i])

    def g_grad_x(self, i, x, z):
        B = self.coeff_matrix(i, z)
        return 2.0 * B.T @ (B @ x) + self.b[i]


def gen_instance(n, K, L, m, seed):
    """Sample and normalize one instance (deterministic in the seed)."""
    if min(n, K, L) < 1 or m < 0:
        raise ValueError("dimensions must be >= 1 and m >= 0")
    rng = np.random.default_rng(seed)
    P = rng.uniform(-1.0, 1.0, size=(m + 1, K + 1, L, n))
    b = rng.uniform(-1.0, 1.0, size=(m + 1, n))
    for i in range(m + 1):
        stacked = P[i].reshape((K + 1) * L, n)
        P[i] /= np.linalg.norm(stacked, 2)
        b[i] /= np.linalg.norm(b[i])
    c = np.full(m + 1, -0.05)
    return QpInstance(P=P, b=b, c_const=c, seed=seed)


@dataclass(frozen=True, eq=False)
class ConcaveQuadratic:
    """z^T M z + 2 r^T z + s with M negative semidefinite."""

    M: np.ndarray
    r: np.ndarray
    s: float


def concavify(inst, i, x):
    """Equivalent concave-in-z data for constraint i at the point x.

    Q(x) = P(x)^T P(x) with P(x) columns P_ik x, r(x) = P(x)^T P_i0 x and
    s(x) = ||P_i0 x||^2 + b_i^T x + c_i; the eigenvalue shift moves
    lambda_max(Q) into the constant so that the supremum over the unit ball
    is unchanged.  (The shift uses the LAPACK eigensolver; the lambda_max
    operation remains the power-iteration routine.)
    """
    x = np.asarray(x, dtype=float)
    Pm = np.einsum("kln,n->lk", inst.P[i, 1:], x)  # L x K, columns P_ik x
    p0 = inst.P[i, 0] @ x
    Q = Pm.T @ Pm
    r = Pm.T @ p0
    s = float(p0 @ p0 + inst.b[i] @ x + inst.c_const[i])
    lam = float(np.linalg.eigvalsh(Q)[-1]) if inst.K > 1 else float(Q[0, 0])
    return ConcaveQuadratic(M=Q - lam * np.eye(inst.K), r=r, s=s + lam)


def trs_solve(cq, radius=1.0, tol=1e-8, max_iter=200):
    """Maximize z^T M z + 2 r^T z + s over ||z|| <= radius (M <= 0).

    Interior stationary points come from the least-squares solve of
    M z = -r; otherwise the boundary multiplier solves the secular equation
    ||(sigma I - M)^{-1} r|| = radius by a safeguarded Newton iteration,
    carried out in the eigenbasis of M.  When r has a (near-)null component
    too small for the secular equation to resolve, the boundary point is
    completed along the null direction instead (the hard case).
    """
    M = np.asarray(cq.M, dtype=float)
    r = np.asarray(cq.r, dtype=float)
    k = r.size
    rnorm = float(np.linalg.norm(r))
    if rnorm == 0.0:
        return np.zeros(k), float(cq.s)

    def value(z):
        return float(z @ M @ z + 2.0 * r @ z + cq.s)

    def kkt_residual(z, sigma):
        return float(np.linalg.norm(M @ z + r - sigma * z))

    w, V = np.linalg.eigh(M)
    c = V.T @ r
    neg = w < -max(1e-12, 1e-14 * abs(float(w[0])))
    # min-norm least-squares solution of M z = -r and the null-space residual
    coef = np.zeros(k)
    coef[neg] = -c[neg] / w[neg]
    z0 = V @ coef
    z0_norm = float(np.linalg.norm(z0))
    r_null_vec = V[:, ~neg] @ c[~neg] if (~neg).any() else np.zeros(k)
    null_norm = float(np.linalg.norm(r_null_vec))
    if null_norm <= tol * max(1.0, rnorm) and z0_norm <= radius + tol:
        return z0, value(z0)

    def null_completion():
        if z0_norm >= radius or null_norm == 0.0:
            return None
        v = r_null_vec / null_norm
        beta = math.sqrt(max(radius**2 - z0_norm**2, 0.0))
        z = z0 + beta * v
        sigma = null_norm / max(beta, 1e-300)
        if sigma >= 0 and kkt_residual(z, sigma) <= tol:
            return z, value(z)
        return None

    if null_norm <= 1e-5 * max(1.0, rnorm):
        got = null_completion()
        if got is not None:
            return got

    # secular equation in the eigenbasis: phi(sigma)^2 = sum c_i^2/(sigma-w_i)^2
    lo = max(float(w[-1]), 0.0)
    hi = lo + rnorm / radius
    sigma = min(hi, max(lo + rnorm / radius * 0.5, 1e-8))
    c_sq = c * c
    z = None
    for _ in range(max_iter):
        shift = max(sigma, lo + 1e-300)
        d = shift - w
        if np.any(d <= 0.0):
            lo = shift
            sigma = 0.5 * (lo + hi)
            continue
        phi_sq = float(np.sum(c_sq / d**2))
        phi = math.sqrt(phi_sq)
        if abs(phi - radius) <= tol * radius:
            z = V @ (c / d)
            sigma = shift
            break
        if phi > radius:
            lo = shift
        else:
            hi = shift
        if hi - lo <= 1e-15 * max(hi, 1.0):
            break
        # Newton step on 1/phi - 1/radius = 0 (nearly linear in sigma)
        dphi = -float(np.sum(c_sq / d**3)) / phi
        step = (phi - radius) * phi / (radius * max(-dphi, 1e-300))
        cand = shift + step
        sigma = cand if lo < cand < hi else 0.5 * (lo + hi)
    if z is not None:
        return z, value(z)
    got = null_completion()
    if got is not None:
        return got
    raise NoConvergence("trust-region secular equation did not converge")


def worst_case_value(inst, i, x, radius=1.0):
    """max_{||z|| <= radius} g_i(x, z) and a maximizer (shared metric path)."""
    z, val = trs_solve(concavify(inst, i, x), radius=radius)
    return val, z


def feasibility_gap(inst, x):
    """max_i sup_z g_i(x, z) over the constraints (-inf when m = 0)."""
    if inst.m == 0:
        return -math.inf
    return max(worst_case_value(inst, i, x)[0] for i in range(1, inst.m + 1))


def worst_case_objective(inst, x):
    return worst_case_value(inst, 0, x)[0]


def optimality_gap_ratio(inst, x, lb, eps):
    """(sup_z g_0(x,z) - LB)/|LB|, +inf when the feasibility gap exceeds eps."""
    fg = feasibility_gap(inst, x)
    return optimality_gap_ratio_value(worst_case_objective(inst, x), fg, lb, eps)


# -- concavified oracles for the first-order solvers ---------------------------


def qp_oracle(inst, i):
    """GeneralOracle for the shifted concave form of constraint i.

    The x-subgradient combines the raw gradient with the eigenvalue-shift
    term (1 - ||z||^2) * grad lambda_max(Q(x)) obtained from the top
    eigenvector.
    """

    def fused(x, z):
        x = np.asarray(x, dtype=float)
        z = np.asarray(z, dtype=float)
        Pm = np.einsum("kln,n->lk", inst.P[i, 1:], x)
        p0 = inst.P[i, 0] @ x
        Q = Pm.T @ Pm
        r = Pm.T @ p0
        if inst.K > 1:
            evals, evecs = np.linalg.eigh(Q)
            lam, v = float(evals[-1]), evecs[:, -1]
        else:
            lam, v = float(Q[0, 0]), np.ones(1)
        zz = float(z @ z)
        val = float(z @ Q @ z - lam * zz + 2.0 * r @ z + p0 @ p0
                    + inst.b[i] @ x + inst.c_const[i] + lam)
        B = inst.coeff_matrix(i, z)
        grad = 2.0 * B.T @ (B @ x) + inst.b[i]
        if zz != 1.0:
            Bv = np.einsum("k,kln->ln", v, inst.P[i, 1:])
            grad = grad + (1.0 - zz) * 2.0 * Bv.T @ (Pm @ v)
        dz = -(2.0 * (Q @ z - lam * z + r))
        return val, grad, dz

    def ev(x, z):
        return fused(x, z)[0]

    def sx(x, z):
        return fused(x, z)[1]

    def sz(x, z):
        return fused(x, z)[2]

    return GeneralOracle(ev, sx, sz, fused)


def qp_constraints(inst):
    """Concavified constraints (with exact pessimizers) for i = 1..m."""
    cons = []
    for i in range(1, inst.m + 1):
        pess = lambda x, _i=i: worst_case_value(inst, _i, x)
        cons.append(Constraint(qp_oracle(inst, i), L2Ball(1.0), zdim=inst.K, pessimize=pess))
    return cons


def qp_objective_constraint(inst):
    pess = lambda x: worst_case_value(inst, 0, x)
    return Constraint(qp_oracle(inst, 0), L2Ball(1.0), zdim=inst.K, pessimize=pess)


def objective_range(inst):
    """Valid bracket for the worst-case objective given the normalization."""
    return (-1.2 - abs(float(inst.c_const[0])), 3.2 + abs(float(inst.c_const[0])))


def to_robust_problem(inst, t_bounds=None):
    """Epigraph form over (x, t) consumed by the saddle-point solvers."""
    base = RobustProblem(
        c=np.zeros(inst.n), domain=L2Ball(1.0), constraints=tuple(qp_constraints(inst)),
    )
    if t_bounds is None:
        t_bounds = objective_range(inst)
    return epigraph_lift(qp_objective_constraint(inst), base, t_bounds=t_bounds)


# -- adapter shared by the baselines -------------------------------------------


class PessProblem:
    """Uniform view of a QP instance or a biaffine robust problem for the
    cutting-plane / online baselines."""

    def __init__(self, domain, n, m, uncertain_objective):
        self.domain = domain
        self.n = n
        self.m = m
        self.uncertain_objective = uncertain_objective

    # indices: 0 = objective (when uncertain), 1..m = constraints


class QpPess(PessProblem):
    def __init__(self, inst):
        super().__init__(L2Ball(1.0), inst.n, inst.m, True)
        self.inst = inst
        self.zdim = inst.K
        self._bar = {i: qp_oracle(inst, i) for i in range(inst.m + 1)}

    def raw_eval(self, i, x, z):
        return self.inst.g_eval(i, x, z)

    def raw_grad_x(self, i, x, z):
        return self.inst.g_grad_x(i, x, z)

    def bar_oracle(self, i):
        return self._bar[i]

    def pessimize(self, i, x):
        return worst_case_value(self.inst, i, x)

    def fg(self, x):
        return feasibility_gap(self.inst, x)

    def wc_obj(self, x):
        return worst_case_objective(self.inst, x)

    def obj_range(self):
        return objective_range(self.inst)

    def zdim_of(self, i):
        return self.inst.K


class RobustPess(PessProblem):
    """Biaffine robust problem with a certain linear objective."""

    def __init__(self, p):
        super().__init__(p.domain, p.n, p.m, False)
        if any(not isinstance(con.oracle, BiaffineConstraint) for con in p.constraints):
            raise NotBiaffine("baselines require biaffine constraints")
        if p.r:
            raise UnsupportedSet("baseline path supports problems without equalities")
        self.p = p

    def raw_eval(self, i, x, z):
        return self.p.constraints[i - 1].oracle.eval(x, z)

    def raw_grad_x(self, i, x, z):
        return self.p.constraints[i - 1].oracle.subgrad_x(x, z)

    def bar_oracle(self, i):
        return self.p.constraints[i - 1].oracle.as_general()

    def pessimize(self, i, x):
        val, z = robust_value(self.p.constraints[i - 1], x)
        return val, z

    def fg(self, x):
        if self.m == 0:
            return -math.inf
        return max(self.pessimize(i, x)[0] for i in range(1, self.m + 1))

    def wc_obj(self, x):
        return float(self.p.c @ np.asarray(x, dtype=float))

    def obj_range(self):
        r_x = sets.radius_bound(self.p.domain, self.p.n)
        span = float(np.linalg.norm(self.p.c)) * r_x + 1.0
        return (-span, span)

    def zdim_of(self, i):
        return self.p.constraints[i - 1].zdim


def as_pess_problem(obj):
    if isinstance(obj, QpInstance):
        return QpPess(obj)
    if isinstance(obj, RobustProblem):
        return RobustPess(obj)
    if isinstance(obj, PessProblem):
        return obj
    raise TypeError("expected a QpInstance or a biaffine RobustProblem")


# -- master solvers -------------------------------------------------------------


def _domain_nlp_pieces(domain, n, offset=0, n_total=None):
    """SLSQP encoding of the domain: bounds and inequality constraints."""
    n_total = n_total if n_total is not None else n
    bounds = [(None, None)] * n_total
    cons = []
    if isinstance(domain, sets.Box):
        for j in range(n):
            bounds[offset + j] = (float(domain.lo[j]), float(domain.hi[j]))
    elif isinstance(domain, sets.LinfBall):
        for j in range(n):
            bounds[offset + j] = (-domain.radius, domain.radius)
    elif isinstance(domain, sets.L2Ball):
        r2 = domain.radius**2
        sl = slice(offset, offset + n)

        def fun(v, _sl=sl, _r2=r2):
            return _r2 - float(v[_sl] @ v[_sl])

        def jac(v, _sl=sl):
            g = np.zeros(v.size)
            g[_sl] = -2.0 * v[_sl]
            return g

        cons.append({"type": "ineq", "fun": fun, "jac": jac})
    elif isinstance(domain, sets.Product):
        k = offset
        for part, d in zip(domain.parts, domain.dims):
            b2, c2 = _domain_nlp_pieces(part, d, k, n_total)
            for j in range(d):
                bounds[k + j] = b2[k + j]
            cons.extend(c2)
            k += d
    else:
        raise MasterFailure(f"master cannot encode domain {type(domain).__name__}")
    return bounds, cons


def slsqp_master(pp, scenarios, x_prev=None):
    """Scenario master via an epigraph NLP solved with SLSQP.

    Minimizes the (worst scenario) objective subject to every accumulated
    scenario constraint and the domain; convexity makes the local solution
    global.
    """
    from scipy.optimize import minimize

    n = pp.n
    uncertain = pp.uncertain_objective
    dim = n + 1 if uncertain else n
    bounds, cons = _domain_nlp_pieces(pp.domain, n, 0, dim)

    for i in range(1, pp.m + 1):
        for z in scenarios.get(i, []):
            def fun(v, _i=i, _z=z):
                return -pp.raw_eval(_i, v[:n], _z)

            def jac(v, _i=i, _z=z):
                g = np.zeros(dim)
                g[:n] = -pp.raw_grad_x(_i, v[:n], _z)
                return g

            cons.append({"type": "ineq", "fun": fun, "jac": jac})
    if uncertain:
        bounds[n] = (None, None)
        for z in scenarios.get(0, []):
            def fun0(v, _z=z):
                return v[n] - pp.raw_eval(0, v[:n], _z)

            def jac0(v, _z=z):
                g = np.zeros(dim)
                g[:n] = -pp.raw_grad_x(0, v[:n], _z)
                g[n] = 1.0
                return g

            cons.append({"type": "ineq", "fun": fun0, "jac": jac0})

        obj = lambda v: float(v[n])
        obj_jac = lambda v: np.concatenate([np.zeros(n), [1.0]])
    else:
        c_vec = pp.p.c

        obj = lambda v: float(c_vec @ v[:n])
        obj_jac = lambda v: c_vec.copy()

    if x_prev is None:
        x_prev = sets.project_simple(pp.domain, np.zeros(n))
    v0 = np.zeros(dim)
    v0[:n] = x_prev
    if uncertain:
        worst0 = max((pp.raw_eval(0, x_prev, z) for z in scenarios.get(0, [])), default=0.0)
        v0[n] = worst0 + 0.1

    res = minimize(obj, v0, jac=obj_jac, bounds=bounds, constraints=cons,
                   method="SLSQP", options={"maxiter": 400, "ftol": 1e-12})
    if not res.success:
        res = minimize(obj, np.zeros(dim), jac=obj_jac, bounds=bounds, constraints=cons,
                       method="SLSQP", options={"maxiter": 800, "ftol": 1e-12})
    if not res.success:
        raise MasterFailure(f"scenario master failed: {res.message}")
    x = sets.project_simple(pp.domain, res.x[:n])
    return x, float(res.fun)


def subgradient_master(pp, scenarios, x_prev=None, iters=20000, tol=1e-6):
    """Projected switching-subgradient scenario master (first-order option)."""
    n = pp.n
    x = x_prev.copy() if x_prev is not None else sets.project_simple(pp.domain, np.zeros(n))
    best_x, best_val = None, math.inf

    def scen_violation(xv):
        worst, grad, val0 = -math.inf, None, None
        for i in range(1, pp.m + 1):
            for z in scenarios.get(i, []):
                v = pp.raw_eval(i, xv, z)
                if v > worst:
                    worst, grad = v, (i, z)
        return worst, grad

    def objective(xv):
        if pp.uncertain_objective:
            return max(pp.raw_eval(0, xv, z) for z in scenarios.get(0, []))
        return float(pp.p.c @ xv)

    for k in range(1, iters + 1):
        worst, which = scen_violation(x)
        if worst > tol and which is not None:
            g = pp.raw_grad_x(which[0], x, which[1])
        else:
            val = objective(x)
            if val < best_val:
                best_val, best_x = val, x.copy()
            if pp.uncertain_objective:
                zbest = max(scenarios.get(0, []), key=lambda z: pp.raw_eval(0, x, z))
                g = pp.raw_grad_x(0, x, zbest)
            else:
                g = pp.p.c
        ng = float(np.linalg.norm(g))
        if ng < 1e-14:
            best_val, best_x = objective(x), x.copy()
            break
        x = sets.project_simple(pp.domain, x - (2.0 / (ng * math.sqrt(k))) * g)
    if best_x is None:
        best_x, best_val = x, objective(x)
    return best_x, float(best_val)


MASTERS = {"slsqp": slsqp_master, "subgrad": subgradient_master}


def _resolve_master(master):
    if callable(master):
        return master
    try:
        return MASTERS[master]
    except KeyError as exc:
        raise MasterFailure(f"unknown master '{master}'") from exc


def nominal_solution(pp, master="slsqp"):
    """Optimal point of the z = 0 scenario problem (the common start)."""
    scenarios = _initial_scenarios(pp)
    return _resolve_master(master)(pp, scenarios)[0]


def _initial_scenarios(pp):
    scen = {i: [np.zeros(pp.zdim_of(i))] for i in range(1, pp.m + 1)}
    if pp.uncertain_objective:
        scen[0] = [np.zeros(pp.zdim_of(0))]
    return scen


def cutting_planes(problem, eps=1e-3, budget=50, master="slsqp", time_budget_s=None,
                   lb_hint=None):
    """Alternate scenario-master solves with exact pessimization.

    Every violating scenario (value above eps, relative to the epigraph value
    for the objective) joins the scenario set; termination happens when no
    violation remains.  The records go per outer iteration.
    """
    pp = as_pess_problem(problem)
    solve = _resolve_master(master)
    scenarios = _initial_scenarios(pp)
    trace = IterTrace()
    t0 = time.perf_counter()
    x_prev = None
    status = "budget_exhausted"
    for outer in range(1, budget + 1):
        x, val = solve(pp, scenarios, x_prev)
        x_prev = x
        grew = False
        for i in range(1, pp.m + 1):
            wc, z_star = pp.pessimize(i, x)
            if wc > eps:
                scenarios[i].append(z_star)
                grew = True
        if pp.uncertain_objective:
            wc0, z0_star = pp.pessimize(0, x)
            if wc0 - val > eps:
                scenarios[0].append(z0_star)
                grew = True
            obj = wc0
        else:
            obj = val
        fg = pp.fg(x)
        ogr = optimality_gap_ratio_value(obj, fg, lb_hint, eps) if lb_hint is not None else float("nan")
        trace.checkpoints.append(
            Checkpoint(outer, time.perf_counter() - t0, obj, fg, ogr, float("nan"))
        )
        trace.x = x
        if not grew:
            status = "ok"
            break
        if time_budget_s is not None and time.perf_counter() - t0 > time_budget_s:
            status = "time_budget"
            break
    trace.status = status
    trace.n_iters = len(trace.checkpoints)
    trace.extras["scenarios"] = scenarios
    trace.extras["lb"] = lower_bound_from_cuts(scenarios, pp, master)
    return trace


def lower_bound_from_cuts(scenarios, problem, master="slsqp"):
    """Optimal value of the scenario-relaxed problem (<= robust optimum)."""
    pp = as_pess_problem(problem)
    if not scenarios or all(len(v) == 0 for v in scenarios.values()):
        raise ValueError("scenario set must be nonempty")
    _, val = _resolve_master(master)(pp, scenarios)
    return float(val)


def fo_pess(problem, budget=20000, eps=1e-3, checkpoint_every=100, lb=None,
            time_budget_s=None, base_step=2.0, start=None, stop_eps=None):
    """Projected online-gradient descent on x with exact pessimization.

    Each step pessimizes every constraint by the trust-region path; if the
    worst value exceeds eps the step follows that constraint's subgradient,
    otherwise the worst-case objective's.  The reported point is the
    step-weighted ergodic average.
    """
    pp = as_pess_problem(problem)
    n = pp.n
    x = np.asarray(start, dtype=float).copy() if start is not None else nominal_solution(pp)
    acc = np.zeros(n)
    acc_w = 0.0
    trace = IterTrace()
    t0 = time.perf_counter()
    status = None
    k = 0
    for k in range(1, budget + 1):
        worst, j_worst, z_worst = -math.inf, None, None
        for i in range(1, pp.m + 1):
            wc, z_star = pp.pessimize(i, x)
            if wc > worst:
                worst, j_worst, z_worst = wc, i, z_star
        if j_worst is not None and worst > eps:
            _, g, _ = pp.bar_oracle(j_worst).evaluate_all(x, z_worst)
        else:
            if pp.uncertain_objective:
                _, z0 = pp.pessimize(0, x)
                _, g, _ = pp.bar_oracle(0).evaluate_all(x, z0)
            else:
                g = pp.p.c
        ng = float(np.linalg.norm(g))
        step = base_step / (max(ng, 1e-12) * math.sqrt(k))
        x = sets.project_simple(pp.domain, x - step * g)
        acc += step * x
        acc_w += step
        if (k % checkpoint_every == 0) or k == budget:
            xbar = acc / acc_w
            fg = pp.fg(xbar)
            obj = pp.wc_obj(xbar)
            ogr = optimality_gap_ratio_value(obj, fg, lb, eps) if lb is not None else float("nan")
            trace.checkpoints.append(
                Checkpoint(k, time.perf_counter() - t0, obj, fg, ogr, float("nan"))
            )
            trace.x = xbar
            if stop_eps is not None and pp.m and fg <= stop_eps:
                status = "ok"
                break
            if time_budget_s is not None and time.perf_counter() - t0 > time_budget_s:
                status = "time_budget"
                break
    if status is None:
        final_fg = trace.checkpoints[-1].feas_gap if trace.checkpoints else math.inf
        status = "ok" if (pp.m == 0 or final_fg <= eps) else "budget_exhausted"
    trace.status = status
    trace.n_iters = k
    if trace.x is None:
        trace.x = acc / max(acc_w, 1e-300)
    return trace


def oco_ogd(problem, eps=1e-3, budget=200000, outer_rounds=20, checkpoint_every=100,
            lb=None, time_budget_s=None, base_step=2.0, start=None):
    """Threshold bisection with online-gradient inner feasibility runs.

    The outer loop halves the objective-threshold interval; each inner run
    plays projected gradient steps on x against per-constraint gradient
    ascent on z, stopping early when the averaged point is eps-feasible for
    the thresholded problem.
    """
    pp = as_pess_problem(problem)
    n = pp.n
    x_start = np.asarray(start, dtype=float).copy() if start is not None else nominal_solution(pp)
    lo, hi = pp.obj_range()
    inner_budget = max(budget // max(outer_rounds, 1), 100)
    zset = L2Ball(1.0)

    trace = IterTrace()
    t0 = time.perf_counter()
    best_x = None
    best_obj = math.inf
    total_iters = 0
    status = "budget_exhausted"

    def record(k):
        if trace.checkpoints and trace.checkpoints[-1].iteration == k:
            return
        if best_x is None:
            obj, fg = math.inf, math.inf
        else:
            obj = pp.wc_obj(best_x)
            fg = pp.fg(best_x)
        ogr = optimality_gap_ratio_value(obj, fg, lb, eps) if lb is not None else float("nan")
        trace.checkpoints.append(
            Checkpoint(k, time.perf_counter() - t0, obj, fg, ogr, float("nan"))
        )

    for _ in range(outer_rounds):
        tau = 0.5 * (lo + hi)
        # warm start at the incumbent: later rounds probe nearby thresholds
        x = best_x.copy() if best_x is not None else x_start.copy()
        zs = {i: np.zeros(pp.zdim_of(i)) for i in range(1, pp.m + 1)}
        if pp.uncertain_objective:
            zs[0] = np.zeros(pp.zdim_of(0))
        acc = np.zeros(n)
        acc_w = 0.0
        feasible_found = False
        for k in range(1, inner_budget + 1):
            total_iters += 1
            worst, j_worst = -math.inf, None
            vals = {}
            for i in sorted(zs):
                v, gx, gz = pp.bar_oracle(i).evaluate_all(x, zs[i])
                if i == 0:
                    v -= tau
                vals[i] = (v, gx, gz)
                if v > worst:
                    worst, j_worst = v, i
            if not pp.uncertain_objective:
                v0 = pp.wc_obj(x) - tau
                if v0 > worst:
                    worst, j_worst = v0, -1
            if j_worst == -1:
                g = pp.p.c
            else:
                g = vals[j_worst][1]
            ng = float(np.linalg.norm(g))
            step = base_step / (max(ng, 1e-12) * math.sqrt(k))
            x = sets.project_simple(pp.domain, x - step * g)
            for i in sorted(zs):
                gz = vals[i][2]
                nz = float(np.linalg.norm(gz))
                step_z = base_step / (max(nz, 1e-12) * math.sqrt(k))
                zs[i] = sets.project_simple(zset, zs[i] - step_z * gz)
            acc += step * x
            acc_w += step
            if (total_iters % checkpoint_every == 0) or k == inner_budget:
                xbar = acc / acc_w
                fg = pp.fg(xbar)
                obj_gap = (pp.wc_obj(xbar) - tau)
                if max(fg, obj_gap) <= eps:
                    if pp.wc_obj(xbar) < best_obj and fg <= eps:
                        best_obj, best_x = pp.wc_obj(xbar), xbar.copy()
                    feasible_found = True
                    record(total_iters)
                    break
                record(total_iters)
                if time_budget_s is not None and time.perf_counter() - t0 > time_budget_s:
                    trace.status = "time_budget"
                    trace.x = best_x
                    trace.n_iters = total_iters
                    trace.extras["tau_interval"] = (lo, hi)
                    return trace
        if feasible_found:
            hi = tau
        else:
            lo = tau
        if hi - lo <= eps * 0.5:
            status = "ok"
            break
    trace.status = status if best_x is not None else "budget_exhausted"
    trace.x = best_x
    trace.n_iters = total_iters
    trace.extras["tau_interval"] = (lo, hi)
    record(total_iters)
    return trace
