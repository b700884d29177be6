"""Small dense/operator linear-algebra helpers used across the solvers."""

import numpy as np

from .errors import NoConvergence


def power_iteration(matvec, dim, tol=1e-8, max_iter=5000, seed=0):
    """Largest eigenvalue of a symmetric PSD operator given by ``matvec``.

    Convergence is tested on the relative change of the Rayleigh quotient.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    nv = np.linalg.norm(v)
    if nv == 0.0:
        v = np.ones(dim)
        nv = np.sqrt(dim)
    v /= nv
    lam = 0.0
    for _ in range(max_iter):
        w = matvec(v)
        nw = np.linalg.norm(w)
        if nw == 0.0:
            return 0.0
        lam_new = float(v @ w)
        v = w / nw
        if abs(lam_new - lam) <= tol * max(abs(lam_new), 1.0):
            return lam_new
        lam = lam_new
    raise NoConvergence("power iteration did not converge")


def _power_extreme(mat, shift, tol_abs, max_iter, seed):
    """Dominant eigenpair of mat + shift*I by power iteration; convergence is
    tested on the residual, which bounds the eigenvalue error for symmetric
    matrices.  Returns (eigenvalue of mat, vector) or None."""
    k = mat.shape[0]
    shifted = mat + shift * np.eye(k) if shift else mat
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(k)
    v /= np.linalg.norm(v)
    for _ in range(max_iter):
        w = shifted @ v
        lam = float(v @ w)
        if float(np.linalg.norm(w - lam * v)) <= tol_abs:
            return lam - shift, v
        nw = float(np.linalg.norm(w))
        if nw == 0.0:
            return -shift if shift else 0.0, v
        v = w / nw
    return None


def lambda_max_sym(mat, tol=1e-9, max_iter=20000, seed=0, return_vec=False):
    """Largest eigenvalue of a symmetric matrix by shifted power iteration.

    The first pass runs unshifted and returns directly when the dominant
    eigenvalue is nonnegative; otherwise a second pass shifts by its modulus
    (which makes the target dominant).  A Gershgorin shift is the fallback
    when moduli nearly tie.  With ``return_vec`` the (approximate) top
    eigenvector is returned as well.
    """
    mat = np.asarray(mat, dtype=float)
    if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
        raise ValueError("matrix must be square")
    k = mat.shape[0]
    if k == 1:
        lam = float(mat[0, 0])
        return (lam, np.ones(1)) if return_vec else lam
    scale = float(np.max(np.sum(np.abs(mat), axis=1)))
    if scale == 0.0:
        return (0.0, np.eye(k)[0]) if return_vec else 0.0

    tol_abs = 0.5 * tol * max(scale, 1.0)
    got = _power_extreme(mat, 0.0, tol_abs, 2000, seed)
    if got is not None and got[0] >= 0.0:
        lam, v = got
        return (float(lam), v) if return_vec else float(lam)
    if got is not None:
        shift = abs(got[0])
        got2 = _power_extreme(mat, shift, tol_abs, max_iter, seed)
        if got2 is not None:
            lam, v = got2
            return (float(lam), v) if return_vec else float(lam)
    got3 = _power_extreme(mat, scale, tol_abs, max_iter, seed)
    if got3 is None:
        raise NoConvergence("power iteration did not converge")
    lam, v = got3
    return (float(lam), v) if return_vec else float(lam)


def op_norm(matvec, rmatvec, shape, tol=1e-8, seed=0):
    """Spectral norm of a linear operator via power iteration on ``A^T A``."""
    m, n = shape
    lam = power_iteration(lambda v: rmatvec(matvec(v)), n, tol=tol, seed=seed)
    return float(np.sqrt(max(lam, 0.0)))


def dense_op_norm(mat):
    """Spectral norm of a small dense matrix (LAPACK SVD)."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0:
        return 0.0
    return float(np.linalg.norm(mat, 2))


def sigma_min(mat):
    """Smallest singular value of a dense matrix (0 for an empty matrix)."""
    mat = np.asarray(mat, dtype=float)
    if mat.size == 0 or mat.shape[0] == 0:
        return 0.0
    return float(np.linalg.svd(mat, compute_uv=False)[-1])
