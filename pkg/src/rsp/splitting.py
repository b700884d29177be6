"""Compilation of intersection domains and uncertainty sets into split form.

Domain intersections are handled by variable copies tied together through
appended equality rows; uncertainty intersections by duplicated lifted dual
variables coupled through omega multipliers.
"""

from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import sets
from .errors import RankDeficient, Unbounded
from .linalg import sigma_min
from .model import RobustProblem, pad_constraint
from .sets import Intersection, OmegaSpec, Product


@dataclass(frozen=True, eq=False)
class LiftedProblem:
    """A robust problem compiled to split saddle-point form.

    ``base`` is the (possibly copy-expanded) problem whose constraints read
    only copy 1 of x; ``factors[i]`` lists the simple sets whose intersection
    is constraint i's uncertainty set (the oracle is attached to the last
    factor's dual block).
    """

    base: RobustProblem
    x_copies: int
    factors: tuple
    omega_specs: Optional[tuple] = None
    n_orig: int = 0

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(tuple(f) for f in self.factors))
        if self.n_orig == 0:
            object.__setattr__(self, "n_orig", self.base.n // max(self.x_copies, 1))

    @property
    def splits(self):
        return [len(f) for f in self.factors]

    def unlift_x(self, x):
        """Original decision vector (copy 1) from a lifted iterate."""
        return np.asarray(x, dtype=float)[: self.n_orig]


def _unsplit_factors(p):
    return tuple((con.zset,) for con in p.constraints)


def _split_factors(p):
    return tuple(
        tuple(con.zset.parts) if isinstance(con.zset, Intersection) else (con.zset,)
        for con in p.constraints
    )


def lift_domain_intersection(p):
    """Expand x into one copy per intersection factor of the domain.

    Copy-equality rows x_1 = x_j are appended to (A, b); every constraint and
    the objective are rebound to copy 1.  The combined equality system must
    keep full row rank.
    """
    dom = p.domain
    if not isinstance(dom, Intersection):
        return LiftedProblem(base=p, x_copies=1, factors=_unsplit_factors(p), n_orig=p.n)
    parts = dom.parts
    q = len(parts)
    n = p.n
    if q == 1:
        base = RobustProblem(p.c, parts[0], p.constraints, p.eq_A, p.eq_b)
        return LiftedProblem(base=base, x_copies=1, factors=_unsplit_factors(base), n_orig=n)

    c_new = np.concatenate([p.c, np.zeros((q - 1) * n)])
    domain = Product(parts, (n,) * q)
    cons = tuple(pad_constraint(con, 0, (q - 1) * n, n_orig=n) for con in p.constraints)

    rows = [np.hstack([p.eq_A, np.zeros((p.r, (q - 1) * n))])] if p.r else []
    eye = np.eye(n)
    for j in range(1, q):
        row = np.zeros((n, q * n))
        row[:, :n] = eye
        row[:, j * n : (j + 1) * n] = -eye
        rows.append(row)
    A_new = np.vstack(rows)
    b_new = np.concatenate([p.eq_b, np.zeros((q - 1) * n)])

    smin = sigma_min(A_new)
    if smin <= 1e-10 * max(float(np.linalg.norm(A_new, 2)), 1.0):
        raise RankDeficient("copy-equality system lost full row rank")

    base = RobustProblem(c_new, domain, cons, A_new, b_new)
    return LiftedProblem(base=base, x_copies=q, factors=_unsplit_factors(base), n_orig=n)


def lift_uncertainty_intersection(p):
    """Per-constraint split of intersection uncertainty sets into factors.

    The constraint oracle depends on the last factor's dual block only; the
    remaining copies are tied to it through omega multipliers in the solver.
    """
    if isinstance(p, LiftedProblem):
        return LiftedProblem(
            base=p.base, x_copies=p.x_copies, factors=_split_factors(p.base),
            n_orig=p.n_orig,
        )
    return LiftedProblem(base=p, x_copies=1, factors=_split_factors(p), n_orig=p.n)


def lift_problem(p):
    """Compose the domain and uncertainty lifts."""
    return lift_uncertainty_intersection(lift_domain_intersection(p))


def omega_bounds(p, eps=None, mu_bar=None):
    """Omega multiplier sets, one per duplicated dual block.

    ``eps[i]`` is the inscribed-ball radius of Z^i (computed from the
    descriptor when omitted); ``mu_bar[i]`` bounds -g_i(x, 0) over the
    feasible set (see ``verify_assumption5``).
    """
    lifted = p if isinstance(p, LiftedProblem) else lift_problem(p)
    base = lifted.base
    m = base.m
    if mu_bar is None:
        raise ValueError("mu_bar is required (run verify_assumption5 or supply bounds)")
    mu_bar = np.broadcast_to(np.asarray(mu_bar, dtype=float), (m,))
    if eps is None:
        eps = [sets.inscribed_radius(con.zset, con.zdim) for con in base.constraints]
    eps = np.broadcast_to(np.asarray(eps, dtype=float), (m,))
    specs = []
    for i, facs in enumerate(lifted.factors):
        specs.append(tuple(OmegaSpec(float(mu_bar[i]), float(eps[i])) for _ in facs[:-1]))
    return specs


def verify_assumption5(p, budget=2000, penalty=10.0, seed=0):
    """Estimate mu_bar_i = -min{g_i(x,0) : x in X, g_j(x,0) <= 0, j != i}.

    Each minimization runs a projected subgradient method on the penalized
    objective with adaptive steps; the returned bound carries a 10% slack.
    """
    base = p.base if isinstance(p, LiftedProblem) else p
    n = base.n
    z0 = [np.zeros(con.zdim) for con in base.constraints]
    out = np.zeros(base.m)
    for i, con_i in enumerate(base.constraints):
        x = sets.project_simple(base.domain, np.zeros(n))
        best = con_i.oracle.eval(x, z0[i])
        for k in range(1, budget + 1):
            _, d, _ = con_i.oracle.evaluate_all(x, z0[i])
            d = np.asarray(d, dtype=float).copy()
            for j, con_j in enumerate(base.constraints):
                if j == i:
                    continue
                gj, dj, _ = con_j.oracle.evaluate_all(x, z0[j])
                if gj > 0:
                    d += penalty * np.asarray(dj, dtype=float)
            nd = float(np.linalg.norm(d))
            if nd < 1e-14:
                break
            x = sets.project_simple(base.domain, x - (2.0 / (nd * np.sqrt(k))) * d)
            val = float(con_i.oracle.eval(x, z0[i]))
            if val < best:
                best = val
                if best < -1e8:
                    raise Unbounded(f"nominal value of constraint {i} diverges")
        out[i] = 1.1 * max(-best, 1e-8)
    return out
