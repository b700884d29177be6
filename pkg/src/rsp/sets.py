"""Convex set descriptors and the projection calculus on their conic lifts.

The descriptors (balls, boxes, singletons, intersections and coordinate
products) are plain frozen dataclasses; the geometric operations dispatch on
the descriptor type so test code can register additional set families.

The lifted-cone projection follows the scalar root equation

    mu * ||P_Z(y/mu)||^2 - y^T P_Z(y/mu) + mu - lam = 0

solved by bracketing bisection, with closed-form fast paths for the l2, l1
and linf balls on the branches where they are valid.
"""

import math
from dataclasses import dataclass
from functools import singledispatch

import numpy as np

from .errors import NoConvergence, NonpositiveEps, UnsupportedSet

# When enabled, closed-form fast paths are cross-checked against bisection.
CROSS_CHECK_FAST_PATHS = False


def _readonly(a):
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class L2Ball:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class L1Ball:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True)
class LinfBall:
    radius: float = 1.0

    def __post_init__(self):
        if self.radius <= 0:
            raise ValueError("radius must be positive")


@dataclass(frozen=True, eq=False)
class Box:
    lo: np.ndarray
    hi: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "lo", _readonly(np.atleast_1d(self.lo)))
        object.__setattr__(self, "hi", _readonly(np.atleast_1d(self.hi)))
        if self.lo.shape != self.hi.shape:
            raise ValueError("lo and hi must have the same shape")
        if np.any(self.lo > self.hi):
            raise ValueError("box requires lo <= hi componentwise")


@dataclass(frozen=True, eq=False)
class Singleton:
    point: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "point", _readonly(np.atleast_1d(self.point)))


@dataclass(frozen=True, eq=False)
class Intersection:
    parts: tuple

    def __post_init__(self):
        flat = []
        for p in self.parts:
            if isinstance(p, Intersection):
                flat.extend(p.parts)
            else:
                flat.append(p)
        if not flat:
            raise ValueError("intersection must have at least one part")
        for p in flat:
            if isinstance(p, Intersection):
                raise ValueError("intersections nest at most one level")
        object.__setattr__(self, "parts", tuple(flat))


@dataclass(frozen=True, eq=False)
class Product:
    """Blockwise product of sets over consecutive coordinate slices."""

    parts: tuple
    dims: tuple

    def __post_init__(self):
        object.__setattr__(self, "parts", tuple(self.parts))
        object.__setattr__(self, "dims", tuple(int(d) for d in self.dims))
        if len(self.parts) != len(self.dims):
            raise ValueError("parts and dims must have equal length")

    def slices(self):
        out, k = [], 0
        for d in self.dims:
            out.append(slice(k, k + d))
            k += d
        return out


def set_dim(s):
    """Intrinsic dimension of the descriptor, or None if dimension-free."""
    if isinstance(s, (Box,)):
        return s.lo.size
    if isinstance(s, Singleton):
        return s.point.size
    if isinstance(s, Product):
        return sum(s.dims)
    if isinstance(s, Intersection):
        for p in s.parts:
            d = set_dim(p)
            if d is not None:
                return d
        return None
    return None


# -- projection ---------------------------------------------------------------


@singledispatch
def project_simple(s, y):
    """Euclidean projection of ``y`` onto a simple (non-intersection) set."""
    raise UnsupportedSet(f"no projection for {type(s).__name__}")


@project_simple.register
def _(s: L2Ball, y):
    y = np.asarray(y, dtype=float)
    n = np.linalg.norm(y)
    if n <= s.radius:
        return y.copy()
    return (s.radius / n) * y


@project_simple.register
def _(s: LinfBall, y):
    y = np.asarray(y, dtype=float)
    return np.clip(y, -s.radius, s.radius)


@project_simple.register
def _(s: Box, y):
    y = np.asarray(y, dtype=float)
    return np.clip(y, s.lo, s.hi)


@project_simple.register
def _(s: Singleton, y):
    return s.point.copy()


@project_simple.register
def _(s: L1Ball, y):
    y = np.asarray(y, dtype=float)
    a = np.abs(y)
    if a.sum() <= s.radius:
        return y.copy()
    # sorted-threshold rule: theta* = (sum_{i<=j*} |q_(i)| - r) / j*
    q = np.sort(a)[::-1]
    cs = np.cumsum(q)
    j = np.arange(1, q.size + 1)
    theta = (cs - s.radius) / j
    jstar = int(np.max(np.nonzero(q >= theta - 1e-15)[0])) + 1
    t = (cs[jstar - 1] - s.radius) / jstar
    return np.sign(y) * np.maximum(a - t, 0.0)


@project_simple.register
def _(s: Product, y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for part, sl in zip(s.parts, s.slices()):
        out[sl] = project_simple(part, y[sl])
    return out


@project_simple.register
def _(s: Intersection, y):
    raise UnsupportedSet("intersections require splitting; project the factors")


# -- support function and maximizer -------------------------------------------


@singledispatch
def support_value(s, y):
    """Support function sigma_S(y) = max_{z in S} z^T y."""
    raise UnsupportedSet(f"no support function for {type(s).__name__}")


@support_value.register
def _(s: L2Ball, y):
    return s.radius * float(np.linalg.norm(y))


@support_value.register
def _(s: L1Ball, y):
    y = np.asarray(y, dtype=float)
    return s.radius * float(np.max(np.abs(y))) if y.size else 0.0


@support_value.register
def _(s: LinfBall, y):
    return s.radius * float(np.sum(np.abs(y)))


@support_value.register
def _(s: Box, y):
    y = np.asarray(y, dtype=float)
    return float(np.sum(np.maximum(s.lo * y, s.hi * y)))


@support_value.register
def _(s: Singleton, y):
    return float(s.point @ np.asarray(y, dtype=float))


@support_value.register
def _(s: Product, y):
    y = np.asarray(y, dtype=float)
    return sum(support_value(p, y[sl]) for p, sl in zip(s.parts, s.slices()))


@singledispatch
def support_argmax(s, y):
    """A maximizer of z^T y over S."""
    raise UnsupportedSet(f"no support maximizer for {type(s).__name__}")


@support_argmax.register
def _(s: L2Ball, y):
    y = np.asarray(y, dtype=float)
    n = np.linalg.norm(y)
    if n == 0.0:
        return np.zeros_like(y)
    return (s.radius / n) * y


@support_argmax.register
def _(s: L1Ball, y):
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    if y.size:
        i = int(np.argmax(np.abs(y)))
        out[i] = s.radius * (1.0 if y[i] >= 0 else -1.0)
    return out


@support_argmax.register
def _(s: LinfBall, y):
    y = np.asarray(y, dtype=float)
    return s.radius * np.where(y >= 0, 1.0, -1.0)


@support_argmax.register
def _(s: Box, y):
    y = np.asarray(y, dtype=float)
    return np.where(y >= 0, s.hi, s.lo).astype(float)


@support_argmax.register
def _(s: Singleton, y):
    return s.point.copy()


@support_argmax.register
def _(s: Product, y):
    y = np.asarray(y, dtype=float)
    out = np.empty_like(y)
    for part, sl in zip(s.parts, s.slices()):
        out[sl] = support_argmax(part, y[sl])
    return out


# -- membership, radii, sampling ----------------------------------------------


@singledispatch
def contains(s, y, tol=1e-9):
    raise UnsupportedSet(f"no membership test for {type(s).__name__}")


@contains.register
def _(s: L2Ball, y, tol=1e-9):
    return float(np.linalg.norm(y)) <= s.radius + tol


@contains.register
def _(s: L1Ball, y, tol=1e-9):
    return float(np.sum(np.abs(y))) <= s.radius + tol


@contains.register
def _(s: LinfBall, y, tol=1e-9):
    y = np.asarray(y, dtype=float)
    return bool(np.all(np.abs(y) <= s.radius + tol))


@contains.register
def _(s: Box, y, tol=1e-9):
    y = np.asarray(y, dtype=float)
    return bool(np.all(y >= s.lo - tol) and np.all(y <= s.hi + tol))


@contains.register
def _(s: Singleton, y, tol=1e-9):
    return float(np.linalg.norm(np.asarray(y, dtype=float) - s.point)) <= tol


@contains.register
def _(s: Intersection, y, tol=1e-9):
    return all(contains(p, y, tol) for p in s.parts)


@contains.register
def _(s: Product, y, tol=1e-9):
    y = np.asarray(y, dtype=float)
    return all(contains(p, y[sl], tol) for p, sl in zip(s.parts, s.slices()))


@singledispatch
def radius_bound(s, dim):
    """Upper bound on max_{z in S} ||z||_2."""
    raise UnsupportedSet(f"no radius bound for {type(s).__name__}")


@radius_bound.register
def _(s: L2Ball, dim):
    return float(s.radius)


@radius_bound.register
def _(s: L1Ball, dim):
    return float(s.radius)


@radius_bound.register
def _(s: LinfBall, dim):
    return float(s.radius * math.sqrt(dim))


@radius_bound.register
def _(s: Box, dim):
    return float(np.linalg.norm(np.maximum(np.abs(s.lo), np.abs(s.hi))))


@radius_bound.register
def _(s: Singleton, dim):
    return float(np.linalg.norm(s.point))


@radius_bound.register
def _(s: Intersection, dim):
    return min(radius_bound(p, dim) for p in s.parts)


@radius_bound.register
def _(s: Product, dim):
    return float(math.sqrt(sum(radius_bound(p, d) ** 2 for p, d in zip(s.parts, s.dims))))


@singledispatch
def inscribed_radius(s, dim):
    """Largest eps with B(0, eps) contained in S (assumes 0 in S)."""
    raise UnsupportedSet(f"no inscribed radius for {type(s).__name__}")


@inscribed_radius.register
def _(s: L2Ball, dim):
    return float(s.radius)


@inscribed_radius.register
def _(s: L1Ball, dim):
    return float(s.radius / math.sqrt(dim))


@inscribed_radius.register
def _(s: LinfBall, dim):
    return float(s.radius)


@inscribed_radius.register
def _(s: Box, dim):
    return float(max(0.0, min(np.min(-s.lo), np.min(s.hi))))


@inscribed_radius.register
def _(s: Singleton, dim):
    return 0.0


@inscribed_radius.register
def _(s: Intersection, dim):
    return min(inscribed_radius(p, dim) for p in s.parts)


@inscribed_radius.register
def _(s: Product, dim):
    return min(inscribed_radius(p, d) for p, d in zip(s.parts, s.dims))


def sample_point(s, dim, rng):
    """A feasible point of S, roughly spread over the set (for estimates)."""
    if isinstance(s, Singleton):
        return s.point.copy()
    if isinstance(s, Box):
        return rng.uniform(s.lo, s.hi)
    if isinstance(s, Product):
        return np.concatenate([sample_point(p, d, rng) for p, d in zip(s.parts, s.dims)])
    if isinstance(s, L2Ball):
        v = rng.standard_normal(dim)
        n = np.linalg.norm(v)
        if n == 0.0:
            return np.zeros(dim)
        return s.radius * rng.uniform() ** (1.0 / dim) * v / n
    if isinstance(s, (L1Ball, LinfBall)):
        r = s.radius
        return project_simple(s, rng.uniform(-r, r, size=dim))
    if isinstance(s, Intersection):
        z = sample_point(s.parts[0], dim, rng)
        for _ in range(100):
            if contains(s, z, 1e-12):
                return z
            for p in s.parts:
                z = project_simple(p, z)
            z *= 0.999
        return np.zeros(dim)
    # generic fallback for registered custom sets: project a spread-out draw
    return project_simple(s, rng.standard_normal(dim))


# -- lifted cones --------------------------------------------------------------


@dataclass(frozen=True)
class ConeLiftSpec:
    """Conic extension {(z, lam): z in lam * base, 0 <= lam <= lambda_cap}."""

    base: object
    lambda_cap: float = math.inf

    def __post_init__(self):
        if not self.lambda_cap > 0:
            raise ValueError("lambda_cap must be positive (or inf)")


@dataclass(frozen=True)
class OmegaSpec:
    """Multiplier set {(nu, mu): -mu_bar <= mu <= 0, ||nu|| <= -mu / eps}."""

    mu_bar: float
    eps: float

    def __post_init__(self):
        if not self.eps > 0:
            raise NonpositiveEps("eps must be strictly positive")
        if not self.mu_bar > 0:
            raise ValueError("mu_bar must be strictly positive")


def _root_residual(s, z_tilde, mu, lam):
    p = project_simple(s, z_tilde / mu)
    return mu * float(p @ p) - float(z_tilde @ p) + mu - lam


def scalar_root_mu(s, z_tilde, lam, tol=1e-10, max_iter=200):
    """Positive root of the cone-projection scalar equation, by bisection.

    Returns 0 when the polar condition sigma_Z(z_tilde) <= -lam holds (the
    equation then has no positive root and the projection is the apex).
    """
    if isinstance(s, Intersection):
        raise UnsupportedSet("scalar root requires a simple set")
    z_tilde = np.asarray(z_tilde, dtype=float)
    lam = float(lam)
    if support_value(s, z_tilde) <= -lam:
        return 0.0

    dim = z_tilde.size
    eps_ball = inscribed_radius(s, dim) if dim else 1.0
    eps_ball = eps_ball if eps_ball > 0 else 1.0
    hi = max(lam, float(np.linalg.norm(z_tilde)) / eps_ball + lam, 1.0)
    f_hi = _root_residual(s, z_tilde, hi, lam)
    doublings = 0
    while f_hi < 0.0:
        hi *= 2.0
        doublings += 1
        if doublings > 120:
            raise NoConvergence("bracketing failed for the scalar root")
        f_hi = _root_residual(s, z_tilde, hi, lam)

    # bracketing iteration: interpolated trial points (Illinois weighting)
    # alternate with plain bisection so the bracket always shrinks
    lo, f_lo = 0.0, -math.inf
    best_mu, best_res = hi, abs(f_hi)
    for it in range(max_iter):
        if it % 2 == 0 and f_lo > -math.inf and f_hi > f_lo:
            mid = (lo * f_hi - hi * f_lo) / (f_hi - f_lo)
            if not (lo < mid < hi):
                mid = 0.5 * (lo + hi)
        else:
            mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        f_mid = _root_residual(s, z_tilde, mid, lam)
        # psi' is nondecreasing on the bracket (convexity of psi)
        assert f_mid <= f_hi + 1e-9 * (1.0 + abs(f_hi)), "scalar equation not monotone"
        if f_lo > -math.inf:
            assert f_mid >= f_lo - 1e-9 * (1.0 + abs(f_lo)), "scalar equation not monotone"
        if abs(f_mid) < best_res:
            best_mu, best_res = mid, abs(f_mid)
        if abs(f_mid) <= tol:
            return mid
        if f_mid < 0.0:
            lo, f_lo = mid, f_mid
        else:
            hi, f_hi = mid, f_mid
    if best_res <= 10.0 * tol:
        return best_mu
    raise NoConvergence("bisection for the scalar root did not converge")


def closed_form_mu(s, z_tilde, lam):
    """Fast-path root for the l2/l1/linf ball cones; None when unavailable.

    Only the branches on which the closed forms solve the scalar equation are
    used; everything else falls back to bisection.  Symmetric uniform boxes
    are linf balls and share that branch.
    """
    z_tilde = np.asarray(z_tilde, dtype=float)
    lam = float(lam)
    if isinstance(s, Box):
        r = float(s.hi[0]) if s.hi.size else 1.0
        if r > 0 and np.all(s.hi == r) and np.all(s.lo == -r):
            s = LinfBall(r)
        else:
            return None
    if not isinstance(s, (L2Ball, L1Ball, LinfBall)):
        return None
    if support_value(s, z_tilde) <= -lam:
        return 0.0
    if lam > 0 and contains(s, z_tilde / lam, 0.0):
        return lam
    r = s.radius
    if isinstance(s, L2Ball):
        return (lam + r * float(np.linalg.norm(z_tilde))) / (1.0 + r * r)
    q = np.sort(np.abs(z_tilde))[::-1]
    cs = np.cumsum(q)
    j = np.arange(1, q.size + 1)
    if isinstance(s, LinfBall):
        mu_j = (r * cs + lam) / (1.0 + j * r * r)
        ok = np.nonzero(q >= r * mu_j - 1e-15)[0]
        if ok.size == 0:
            return lam if lam >= 0 else None
        jstar = int(ok.max())
        return float(mu_j[jstar])
    # L1Ball: mu = (r * sum_{i<=j} q_i + j*lam) / (j + r^2),
    # j* = max{j: q_(j) >= (sum_{i<=j} q_i - r*lam) / (j + r^2)}
    thr = (cs - r * lam) / (j + r * r)
    ok = np.nonzero(q >= thr - 1e-15)[0]
    if ok.size == 0:
        return lam if lam >= 0 else None
    jstar = int(ok.max())
    return float((r * cs[jstar] + (jstar + 1) * lam) / ((jstar + 1) + r * r))


def project_cone_lift(spec, u, tol=1e-10):
    """Projection onto the (optionally capped) conic extension of ``spec.base``.

    Returns the pair (z_tilde', lam') with lam' = clamp(mu, 0, lambda_cap) and
    z_tilde' = lam' * P_Z(z_tilde / lam') (zero at the apex).
    """
    z_tilde, lam = u
    z_tilde = np.asarray(z_tilde, dtype=float)
    lam = float(lam)
    s = spec.base
    if isinstance(s, Intersection):
        raise UnsupportedSet("intersection bases must be handled by splitting")
    cap = float(spec.lambda_cap)

    if 0.0 <= lam <= cap:
        if lam == 0.0:
            if float(np.linalg.norm(z_tilde)) <= 1e-15:
                return z_tilde.copy(), 0.0
        elif contains(s, z_tilde / lam, 1e-14):
            return z_tilde.copy(), lam

    mu = closed_form_mu(s, z_tilde, lam)
    if mu is None:
        mu = scalar_root_mu(s, z_tilde, lam, tol=tol)
    elif CROSS_CHECK_FAST_PATHS:
        mu_bis = scalar_root_mu(s, z_tilde, lam, tol=tol)
        assert abs(mu - mu_bis) <= 1e-7 * (1.0 + abs(mu)), (s, z_tilde, lam, mu, mu_bis)

    mu_star = min(max(mu, 0.0), cap)
    if mu_star == 0.0:
        return np.zeros_like(z_tilde), 0.0
    return mu_star * project_simple(s, z_tilde / mu_star), mu_star


def cone_lift_kkt_residual(spec, u_in, u_out):
    """Optimality residual of a computed cone-lift projection."""
    z_tilde, lam = np.asarray(u_in[0], dtype=float), float(u_in[1])
    mu_star = float(u_out[1])
    cap = float(spec.lambda_cap)
    s = spec.base
    if mu_star <= 0.0:
        return max(0.0, support_value(s, z_tilde) + lam)
    res = _root_residual(s, z_tilde, mu_star, lam)
    if mu_star >= cap:
        return max(0.0, res)
    return abs(res)


def prox_support(domain, theta, y):
    """prox of theta * sigma_X via the Moreau identity: y - theta * P_X(y/theta)."""
    if theta <= 0:
        raise ValueError("theta must be positive")
    y = np.asarray(y, dtype=float)
    return y - theta * project_simple(domain, y / theta)


def project_omega(spec, w, tol=1e-10):
    """Projection onto the omega multiplier set.

    The set is the reflection (mu -> -mu) of the conic extension of the ball
    of radius 1/eps capped at mu_bar, so the cone-lift projection applies on
    reflected coordinates.
    """
    nu, mu = w
    cone = ConeLiftSpec(L2Ball(1.0 / spec.eps), spec.mu_bar)
    nu_p, mu_p = project_cone_lift(cone, (np.asarray(nu, dtype=float), -float(mu)), tol=tol)
    return nu_p, -mu_p
