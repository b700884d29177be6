"""Robust problem data model: uncertain constraints, oracles, validation."""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from . import sets
from .errors import DimensionMismatch, RequiresPessimizer, UnsupportedSet
from .linalg import sigma_min


@dataclass(frozen=True)
class GeneralOracle:
    """Black-box constraint g(x, z), convex in x and concave in z.

    ``subgrad_x(x, z)`` returns an element of the x-subdifferential of g and
    ``subgrad_negz(x, z)`` an element of the z-subdifferential of -g.  The
    optional ``fused`` callable returns ``(g, d_x, d_negz)`` in one call when
    the three share work.
    """

    eval: Callable
    subgrad_x: Callable
    subgrad_negz: Callable
    fused: Optional[Callable] = None

    def evaluate_all(self, x, z):
        if self.fused is not None:
            return self.fused(x, z)
        return self.eval(x, z), self.subgrad_x(x, z), self.subgrad_negz(x, z)


@dataclass(frozen=True, eq=False)
class BiaffineConstraint:
    """g(x, z) = x^T Q z + d^T x + q^T z + gamma."""

    Q: np.ndarray
    d: np.ndarray
    q: np.ndarray
    gamma: float

    def __post_init__(self):
        object.__setattr__(self, "Q", np.atleast_2d(np.asarray(self.Q, dtype=float)))
        object.__setattr__(self, "d", np.atleast_1d(np.asarray(self.d, dtype=float)))
        object.__setattr__(self, "q", np.atleast_1d(np.asarray(self.q, dtype=float)))
        object.__setattr__(self, "gamma", float(self.gamma))
        if self.Q.shape != (self.d.size, self.q.size):
            raise DimensionMismatch(
                f"Q has shape {self.Q.shape}, expected {(self.d.size, self.q.size)}"
            )

    @property
    def xdim(self):
        return self.d.size

    @property
    def zdim(self):
        return self.q.size

    def eval(self, x, z):
        return float(x @ self.Q @ z + self.d @ x + self.q @ z + self.gamma)

    def subgrad_x(self, x, z):
        return self.Q @ z + self.d

    def subgrad_negz(self, x, z):
        return -(self.Q.T @ x + self.q)

    def evaluate_all(self, x, z):
        return self.eval(x, z), self.subgrad_x(x, z), self.subgrad_negz(x, z)

    def as_general(self):
        return GeneralOracle(self.eval, self.subgrad_x, self.subgrad_negz, self.evaluate_all)


@dataclass(frozen=True, eq=False)
class Constraint:
    """An uncertain constraint sup_{z in zset} g(x, z) <= 0.

    ``pessimize``, when given, maps x to ``(max_z g(x, z), argmax z)``; it is
    required for worst-case evaluation of non-biaffine oracles.  When the
    uncertainty set misses the origin, ``z_interior`` names the interior
    point to translate by (see ``shift_origin``).
    """

    oracle: object
    zset: object
    zdim: Optional[int] = None
    pessimize: Optional[Callable] = None
    z_interior: Optional[np.ndarray] = None

    def __post_init__(self):
        zdim = self.zdim
        if zdim is None:
            if isinstance(self.oracle, BiaffineConstraint):
                zdim = self.oracle.zdim
            else:
                zdim = sets.set_dim(self.zset)
        if zdim is None:
            raise DimensionMismatch("zdim is required when the set is dimension-free")
        object.__setattr__(self, "zdim", int(zdim))

    @property
    def is_biaffine(self):
        return isinstance(self.oracle, BiaffineConstraint)


@dataclass(frozen=True, eq=False)
class RobustProblem:
    """min c^T x over x in domain s.t. sup_z g_i(x, z) <= 0 and A x = b."""

    c: np.ndarray
    domain: object
    constraints: tuple = ()
    eq_A: Optional[np.ndarray] = None
    eq_b: Optional[np.ndarray] = None

    def __post_init__(self):
        object.__setattr__(self, "c", np.atleast_1d(np.asarray(self.c, dtype=float)))
        object.__setattr__(self, "constraints", tuple(self.constraints))
        A = self.eq_A
        b = self.eq_b
        if A is None:
            A = np.zeros((0, self.n))
        if b is None:
            b = np.zeros(0)
        A = np.asarray(A, dtype=float).reshape(-1, self.n) if np.size(A) else np.zeros((0, self.n))
        b = np.atleast_1d(np.asarray(b, dtype=float)) if np.size(b) else np.zeros(0)
        object.__setattr__(self, "eq_A", A)
        object.__setattr__(self, "eq_b", b)
        if self.eq_A.shape[0] != self.eq_b.size:
            raise DimensionMismatch("A and b row counts differ")
        dom_dim = sets.set_dim(self.domain)
        if dom_dim is not None and dom_dim != self.n:
            raise DimensionMismatch(f"domain dimension {dom_dim} != n = {self.n}")
        for i, con in enumerate(self.constraints):
            if isinstance(con.oracle, BiaffineConstraint) and con.oracle.xdim != self.n:
                raise DimensionMismatch(f"constraint {i} has x-dimension {con.oracle.xdim}")
            zs_dim = sets.set_dim(con.zset)
            if zs_dim is not None and zs_dim != con.zdim:
                raise DimensionMismatch(f"constraint {i} set dimension {zs_dim} != {con.zdim}")

    @property
    def n(self):
        return self.c.size

    @property
    def m(self):
        return len(self.constraints)

    @property
    def r(self):
        return self.eq_b.size


@dataclass
class ValidationReport:
    ok: bool
    checks: list
    sigma_min: float
    failures: list = field(default_factory=list)

    def raise_if_failed(self):
        from . import errors

        if not self.ok:
            name, detail = self.failures[0]
            raise getattr(errors, name, errors.RspError)(detail)


def validate_problem(p, rank_tol=1e-8):
    """Check dimensions, row rank of A and origin membership of each Z^i.

    ``rank_tol`` is relative to the largest singular value of A.  The report
    is purely informational; call ``raise_if_failed`` to convert the first
    failure into a typed exception.
    """
    checks = []
    failures = []

    for i, con in enumerate(p.constraints):
        ok = True
        detail = ""
        if isinstance(con.oracle, BiaffineConstraint):
            ok = con.oracle.xdim == p.n and con.oracle.zdim == con.zdim
            detail = f"Q is {con.oracle.Q.shape}"
        checks.append((f"constraint[{i}] dimensions", ok, detail))
        if not ok:
            failures.append(("DimensionMismatch", f"constraint {i}: {detail}"))

    smin = sigma_min(p.eq_A)
    if p.r == 0:
        checks.append(("equality rank", True, "no equality constraints"))
    else:
        smax = float(np.linalg.norm(p.eq_A, 2))
        ok = smin > rank_tol * max(smax, 1.0)
        checks.append(("equality rank", ok, f"sigma_min={smin:.3e}"))
        if not ok:
            failures.append(("RankDeficient", f"sigma_min(A) = {smin:.3e}"))

    for i, con in enumerate(p.constraints):
        try:
            has_origin = sets.contains(con.zset, np.zeros(con.zdim), 1e-12)
        except UnsupportedSet:
            has_origin = True
        if has_origin:
            checks.append((f"constraint[{i}] origin in Z", True, ""))
        elif getattr(con, "z_interior", None) is not None:
            checks.append((f"constraint[{i}] origin in Z", True, "translated by z_interior"))
        else:
            checks.append((f"constraint[{i}] origin in Z", False, "0 not in Z"))
            failures.append(("OriginNotInZ", f"constraint {i}: origin not in uncertainty set"))

    return ValidationReport(ok=not failures, checks=checks, sigma_min=smin, failures=failures)


def eval_constraint(con, x, z):
    """Evaluate g(x, z) for one constraint with dimension checks."""
    x = np.atleast_1d(np.asarray(x, dtype=float))
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.size != con.zdim:
        raise DimensionMismatch(f"z has size {z.size}, expected {con.zdim}")
    if isinstance(con.oracle, BiaffineConstraint):
        if x.size != con.oracle.xdim:
            raise DimensionMismatch(f"x has size {x.size}, expected {con.oracle.xdim}")
        return con.oracle.eval(x, z)
    return float(con.oracle.eval(x, z))


def robust_value(con, x):
    """Worst case (max over z in Z) of one constraint, with a maximizer.

    Biaffine constraints are pessimized exactly through the support function
    of the uncertainty set; general oracles need the constraint's
    ``pessimize`` callback.
    """
    x = np.asarray(x, dtype=float)
    if con.pessimize is not None:
        val, z = con.pessimize(x)
        return float(val), np.asarray(z, dtype=float)
    if isinstance(con.oracle, BiaffineConstraint):
        o = con.oracle
        y = o.Q.T @ x + o.q
        try:
            z_star = sets.support_argmax(con.zset, y)
        except UnsupportedSet as exc:
            raise RequiresPessimizer(
                "intersection uncertainty sets need an explicit pessimize callback"
            ) from exc
        return float(y @ z_star + o.d @ x + o.gamma), z_star
    raise RequiresPessimizer("general oracles need an explicit pessimize callback")


def worst_case_gaps(p, x):
    """Vector of worst-case values f_i(x) for every constraint."""
    return np.array([robust_value(con, x)[0] for con in p.constraints])


def _pad_biaffine(o, n_before, n_after, t_coeff=0.0):
    Q = np.vstack([np.zeros((n_before, o.zdim)), o.Q, np.zeros((n_after, o.zdim))])
    d = np.concatenate([np.zeros(n_before), o.d, np.zeros(n_after)])
    if n_after > 0 and t_coeff != 0.0:
        d[-1] = t_coeff
    return BiaffineConstraint(Q, d, o.q, o.gamma)


def _pad_general(o, xsl, t_coeff=0.0):
    def ev(x, z):
        v = o.eval(x[xsl], z)
        return v + t_coeff * x[-1] if t_coeff else v

    def sx(x, z):
        g = np.zeros(x.size)
        g[xsl] = o.subgrad_x(x[xsl], z)
        if t_coeff:
            g[-1] += t_coeff
        return g

    def sz(x, z):
        return o.subgrad_negz(x[xsl], z)

    def fused(x, z):
        v, dx, dz = o.evaluate_all(x[xsl], z)
        g = np.zeros(x.size)
        g[xsl] = dx
        if t_coeff:
            g[-1] += t_coeff
        return (v + t_coeff * x[-1] if t_coeff else v), g, dz

    return GeneralOracle(ev, sx, sz, fused)


def pad_constraint(con, n_before, n_after, t_coeff=0.0, n_orig=None):
    """Rebind a constraint to an extended x vector (extra coordinates unused).

    ``t_coeff`` adds ``t_coeff * x[-1]`` to the constraint value (used by the
    epigraph lift).
    """
    if isinstance(con.oracle, BiaffineConstraint):
        oracle = _pad_biaffine(con.oracle, n_before, n_after, t_coeff)
    else:
        xsl = slice(n_before, n_before + n_orig)
        oracle = _pad_general(con.oracle, xsl, t_coeff)
    pess = None
    if con.pessimize is not None:
        inner = con.pessimize
        lo, hi = n_before, n_before + (n_orig if n_orig is not None else 0)

        def pess(x, _inner=inner, _lo=lo, _hi=hi, _t=t_coeff):
            val, z = _inner(x[_lo:_hi] if n_orig is not None else x)
            return (val + _t * x[-1] if _t else val), z

    return Constraint(oracle, con.zset, zdim=con.zdim, pessimize=pess)


def epigraph_lift(objective_oracle, p, t_bounds=None):
    """Lift an uncertain objective into an epigraph variable t.

    Returns a problem over (x, t) minimizing t, with the added constraint
    g0(x, z) - t <= 0 and the domain extended by a box on t.
    """
    n = p.n
    if t_bounds is None:
        t_bounds = (-1e6, 1e6)
    t_lo, t_hi = float(t_bounds[0]), float(t_bounds[1])

    new_cons = [pad_constraint(con, 0, 1, n_orig=n) for con in p.constraints]
    new_cons.append(pad_constraint(objective_oracle, 0, 1, t_coeff=-1.0, n_orig=n))

    c_new = np.zeros(n + 1)
    c_new[-1] = 1.0
    domain = sets.Product((p.domain, sets.Box([t_lo], [t_hi])), (n, 1))
    A_new = np.hstack([p.eq_A, np.zeros((p.r, 1))]) if p.r else None
    return RobustProblem(c_new, domain, tuple(new_cons), A_new, p.eq_b if p.r else None)


def _shift_set(s, z0):
    if isinstance(s, sets.Box):
        return sets.Box(s.lo - z0, s.hi - z0)
    if isinstance(s, sets.Singleton):
        return sets.Singleton(s.point - z0)
    if isinstance(s, sets.Intersection):
        return sets.Intersection(tuple(_shift_set(p, z0) for p in s.parts))
    raise UnsupportedSet(f"{type(s).__name__} cannot be translated")


def shift_origin(con):
    """Translate z by the constraint's interior point so 0 lands in Z.

    Returns an equivalent constraint over the shifted set; biaffine data is
    rewritten in closed form, general oracles are wrapped.
    """
    if con.z_interior is None:
        raise ValueError("constraint has no z_interior to translate by")
    z0 = np.atleast_1d(np.asarray(con.z_interior, dtype=float))
    if not sets.contains(con.zset, z0, 1e-9):
        raise DimensionMismatch("z_interior is not inside the uncertainty set")
    zset = _shift_set(con.zset, z0)
    if isinstance(con.oracle, BiaffineConstraint):
        o = con.oracle
        oracle = BiaffineConstraint(o.Q, o.d + o.Q @ z0, o.q, o.gamma + float(o.q @ z0))
    else:
        inner = con.oracle
        oracle = GeneralOracle(
            lambda x, z: inner.eval(x, z + z0),
            lambda x, z: inner.subgrad_x(x, z + z0),
            lambda x, z: inner.subgrad_negz(x, z + z0),
            lambda x, z: inner.evaluate_all(x, z + z0),
        )
    pess = None
    if con.pessimize is not None:
        inner_p = con.pessimize

        def pess(x, _p=inner_p, _z0=z0):
            val, z = _p(x)
            return val, np.asarray(z, dtype=float) - _z0

    return Constraint(oracle, zset, zdim=con.zdim, pessimize=pess)


def normalize_origin(p):
    """Apply ``shift_origin`` to every constraint whose set misses the origin.

    Returns the normalized problem and the list of translated indices.
    """
    cons = list(p.constraints)
    shifted = []
    for i, con in enumerate(cons):
        try:
            has_origin = sets.contains(con.zset, np.zeros(con.zdim), 1e-12)
        except UnsupportedSet:
            continue
        if not has_origin:
            cons[i] = shift_origin(con)
            shifted.append(i)
    if not shifted:
        return p, shifted
    return RobustProblem(p.c, p.domain, tuple(cons), p.eq_A, p.eq_b), shifted


def spot_check_convex_concave(con, domain, seed=0, trials=32, tol=1e-9, xdim=None):
    """Randomized Jensen midpoint test for convexity in x / concavity in z.

    Advisory only; a black-box oracle cannot be certified.  Returns the list
    of violations found.
    """
    rng = np.random.default_rng(seed)
    n = xdim if xdim is not None else sets.set_dim(domain)
    if n is None:
        raise DimensionMismatch("xdim is required for dimension-free domains")
    violations = []
    for _ in range(trials):
        x1 = sets.sample_point(domain, n, rng)
        x2 = sets.sample_point(domain, n, rng)
        z1 = sets.sample_point(con.zset, con.zdim, rng)
        z2 = sets.sample_point(con.zset, con.zdim, rng)
        g = con.oracle.eval
        mid_x = g(0.5 * (x1 + x2), z1)
        if mid_x > 0.5 * (g(x1, z1) + g(x2, z1)) + tol:
            violations.append(("convexity", x1, x2, z1))
        mid_z = g(x1, 0.5 * (z1 + z2))
        if mid_z < 0.5 * (g(x1, z1) + g(x1, z2)) - tol:
            violations.append(("concavity", x1, z1, z2))
    return violations
