"""Perspective values/subgradients of constraint functions and dual bounds."""

from dataclasses import dataclass

import numpy as np

from . import sets
from .errors import NotStrictlyFeasible, OracleFailure, RspError, UnsupportedSet
from .linalg import dense_op_norm, sigma_min
from .model import worst_case_gaps


@dataclass(frozen=True, eq=False)
class LiftedVar:
    """Lifted dual variable u = (z_tilde, lam) with z_tilde in lam * Z."""

    z_tilde: np.ndarray
    lam: float

    def __post_init__(self):
        object.__setattr__(self, "z_tilde", np.atleast_1d(np.asarray(self.z_tilde, dtype=float)))
        object.__setattr__(self, "lam", float(self.lam))

    def as_array(self):
        return np.concatenate([self.z_tilde, [self.lam]])

    @staticmethod
    def from_array(a):
        a = np.asarray(a, dtype=float)
        return LiftedVar(a[:-1], a[-1])


@dataclass(frozen=True, eq=False)
class SlaterCertificate:
    """Strictly feasible interior point with the data needed for dual bounds."""

    x_hat: np.ndarray
    f_hat: np.ndarray
    eps_hat: float
    v_lower: float

    def __post_init__(self):
        object.__setattr__(self, "x_hat", np.atleast_1d(np.asarray(self.x_hat, dtype=float)))
        object.__setattr__(self, "f_hat", np.atleast_1d(np.asarray(self.f_hat, dtype=float)))
        if self.f_hat.size and float(np.max(self.f_hat)) >= 0.0:
            raise NotStrictlyFeasible("certificate requires max_i f_i(x_hat) < 0")
        if not self.eps_hat > 0:
            raise ValueError("eps_hat must be positive")


@dataclass(frozen=True, eq=False)
class DualBounds:
    lambda_bar: float
    r_w: float
    r_u: np.ndarray
    r_pi: float = float("nan")

    def __post_init__(self):
        object.__setattr__(self, "r_u", np.atleast_1d(np.asarray(self.r_u, dtype=float)))


def _z_of(u):
    if u.lam > 0.0:
        return u.z_tilde / u.lam
    return np.zeros_like(u.z_tilde)


def perspective_value(con, x, u):
    """lam * g(x, z_tilde/lam), extended by 0 at lam = 0."""
    if u.lam < 0:
        raise ValueError("lam must be nonnegative")
    if u.lam == 0.0:
        return 0.0
    try:
        return u.lam * float(con.oracle.eval(np.asarray(x, dtype=float), _z_of(u)))
    except RspError:
        raise
    except Exception as exc:
        raise OracleFailure(str(exc)) from exc


def perspective_subgrad(con, x, u):
    """Subgradients of the perspective from subgradients of g.

    Returns ``(d_x, d_u)`` with d_x in the x-subdifferential of the
    perspective and d_u in the u-subdifferential of its negation:
    d_x = lam * d, d in subgrad_x g(x, z); d_u = (d_z, -g(x,z) - z^T d_z)
    with d_z in subgrad of -g(x, .) and z = z_tilde/lam (z = 0 at lam = 0).
    """
    if u.lam < 0:
        raise ValueError("lam must be nonnegative")
    x = np.asarray(x, dtype=float)
    z = _z_of(u)
    try:
        g, dxg, dz = con.oracle.evaluate_all(x, z)
    except RspError:
        raise
    except Exception as exc:
        raise OracleFailure(str(exc)) from exc
    d_x = u.lam * np.asarray(dxg, dtype=float)
    dz = np.asarray(dz, dtype=float)
    d_u = np.concatenate([dz, [-float(g) - float(z @ dz)]])
    return d_x, d_u


def set_radii(p):
    """Per-constraint bounds R_i = max_{z in Z^i} ||z||."""
    return np.array(
        [sets.radius_bound(con.zset, con.zdim) for con in p.constraints], dtype=float
    )


def default_v_lower(p):
    """-||c|| R_X - 1: a strict lower bound on the optimum for bounded X."""
    r_x = sets.radius_bound(p.domain, p.n)
    if not np.isfinite(r_x):
        raise ValueError("a v_lower must be supplied for unbounded domains")
    return -float(np.linalg.norm(p.c)) * r_x - 1.0


def dual_bounds(p, cert, radii=None):
    """Bounds on the optimal multipliers from a Slater certificate.

    lambda_bar = (c^T x_hat - v_lower) / (-min_i f_i(x_hat)),
    R_w = (1/sigma_min(A)) ((c^T x_hat - v_lower)/eps_hat + ||c||),
    r_u_i = lambda_bar * sqrt(1 + R_i^2).  With m = 0, lambda_bar = 0.
    """
    if radii is None:
        radii = set_radii(p)
    radii = np.atleast_1d(np.asarray(radii, dtype=float))
    gap = float(p.c @ cert.x_hat) - cert.v_lower
    if gap <= 0:
        raise ValueError("v_lower must be strictly below c^T x_hat")

    if p.m == 0:
        lam_bar = 0.0
    else:
        worst = float(np.max(cert.f_hat))
        if worst >= 0:
            raise NotStrictlyFeasible("certificate is not strictly feasible")
        lam_bar = gap / (-worst)

    if p.r == 0:
        r_w = 0.0
    else:
        smin = sigma_min(p.eq_A)
        if smin <= 0:
            raise ValueError("A must have full row rank")
        r_w = (gap / cert.eps_hat + float(np.linalg.norm(p.c))) / smin

    r_u = lam_bar * np.sqrt(1.0 + radii**2) if p.m else np.zeros(0)
    return DualBounds(lambda_bar=lam_bar, r_w=r_w, r_u=r_u)


def r_pi_bound(compiled, bounds, radii=None):
    """||c|| + lambda_bar * sum_i ||Qt_i|| (R_i + 1) (biaffine problems)."""
    if radii is None:
        radii = compiled.radii
    radii = np.atleast_1d(np.asarray(radii, dtype=float)) if len(compiled.Qt) else np.zeros(0)
    total = float(np.linalg.norm(compiled.c))
    for Qt_i, r_i in zip(compiled.Qt, radii):
        total += bounds.lambda_bar * dense_op_norm(Qt_i) * (r_i + 1.0)
    return total


def estimate_interior_radius(p, x_hat, f_of=None, max_radius=None, tol=1e-3, iters=40):
    """Conservative eps_hat: bisect the largest step along the 2n axis
    directions keeping x in the domain and all worst-case values negative."""
    x_hat = np.asarray(x_hat, dtype=float)
    if f_of is None:
        f_of = lambda x: worst_case_gaps(p, x)

    def admissible(s):
        for j in range(p.n):
            for sgn in (1.0, -1.0):
                y = x_hat.copy()
                y[j] += sgn * s
                try:
                    if not sets.contains(p.domain, y, 1e-12):
                        return False
                except UnsupportedSet:
                    return False
                vals = f_of(y)
                if len(vals) and float(np.max(vals)) >= 0.0:
                    return False
        return True

    if max_radius is None:
        r_x = sets.radius_bound(p.domain, p.n)
        max_radius = r_x if np.isfinite(r_x) and r_x > 0 else 1.0
    lo, hi = 0.0, float(max_radius)
    if admissible(hi):
        return hi
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        if admissible(mid):
            lo = mid
        else:
            hi = mid
        if hi - lo <= tol * max(hi, 1e-12):
            break
    if lo <= 0.0:
        # fall back to a tiny but positive radius; the point is interior
        return 1e-9
    return lo
