"""Dense linear algebra: Jacobi SVD, pseudo-inverse, and square solves.

Matrices are plain 2-D float64 numpy arrays throughout.
"""
import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .errors import NumericalFailure, SingularMatrix

MAX_SWEEPS = 60
_EPS = np.finfo(float).eps


@dataclass(frozen=True)
class SvdResult:
    u: np.ndarray       # (m, r), orthonormal columns
    sigma: np.ndarray   # (r,), non-increasing
    vt: np.ndarray      # (r, n), orthonormal rows


def _round_robin(n):
    """Yield (left, right) index arrays of disjoint pairs covering all pairs once.

    Uses the circle method; ``n`` must be even.
    """
    players = list(range(n))
    for _ in range(n - 1):
        left = np.array(players[: n // 2])
        right = np.array(players[n // 2:][::-1])
        yield left, right
        players = [players[0], players[-1]] + players[1:-1]


def _hestenes(a):
    """One-sided Jacobi on a matrix with rows >= cols. Returns (W, V) with W = A V."""
    m, n = a.shape
    npad = n + (n % 2)
    w = np.zeros((m, npad))
    w[:, :n] = a
    v = np.eye(npad)
    tol = max(m, 1) * _EPS
    # columns this small are numerically zero; rotating them only churns noise
    negligible = (_EPS * np.linalg.norm(a)) ** 2
    schedule = list(_round_robin(npad)) if npad > 1 else []
    for _ in range(MAX_SWEEPS):
        rotated = False
        for left, right in schedule:
            wl = w[:, left]
            wr = w[:, right]
            alpha = np.einsum("ij,ij->j", wl, wl)
            beta = np.einsum("ij,ij->j", wr, wr)
            gamma = np.einsum("ij,ij->j", wl, wr)
            active = ((np.abs(gamma) > tol * np.sqrt(alpha * beta))
                      & (alpha > negligible) & (beta > negligible))
            if not active.any():
                continue
            rotated = True
            left, right = left[active], right[active]
            alpha, beta, gamma = alpha[active], beta[active], gamma[active]
            zeta = (beta - alpha) / (2.0 * gamma)
            t = np.where(zeta >= 0, 1.0, -1.0) / (np.abs(zeta) + np.hypot(1.0, zeta))
            cs = 1.0 / np.sqrt(1.0 + t * t)
            sn = cs * t
            for mat in (w, v):
                xl = mat[:, left]
                xr = mat[:, right]
                mat[:, left] = cs * xl - sn * xr
                mat[:, right] = sn * xl + cs * xr
        if not rotated:
            return w[:, :n], v[:n, :n]
    raise NumericalFailure(f"Jacobi SVD did not converge in {MAX_SWEEPS} sweeps")


def _complete_orthonormal(u, keep):
    """Replace columns of ``u`` not flagged in ``keep`` by an orthonormal completion."""
    missing = np.flatnonzero(~keep)
    basis = u[:, keep]
    comp = np.eye(u.shape[0]) - basis @ basis.T
    comp -= basis @ (basis.T @ comp)          # second pass for orthogonality
    q, _, _ = scipy.linalg.qr(comp, mode="economic", pivoting=True)
    u[:, missing] = q[:, : missing.size]
    return u


def thin_svd(a):
    """Thin SVD ``a = u @ diag(sigma) @ vt`` via one-sided Jacobi rotations.

    A column-pivoted QR first strips the numerical null space, so the
    rotations only act on an ``r x r`` problem where ``r`` is the numerical
    rank. Singular values come out sorted non-increasing and each singular
    pair is sign-normalized so the largest-magnitude entry of the right
    singular vector is positive, which makes the result deterministic.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or min(a.shape) < 1:
        raise ValueError("thin_svd needs a non-empty 2-D matrix")
    if not np.all(np.isfinite(a)):
        raise ValueError("matrix has non-finite entries")
    transposed = a.shape[0] < a.shape[1]
    work = a.T if transposed else a
    m, n = work.shape
    rel = max(m, n) * _EPS
    q, r, piv = scipy.linalg.qr(work, mode="economic", pivoting=True)
    diag = np.abs(np.diag(r))
    rank = int(np.count_nonzero(diag > rel * diag[0])) if diag[0] > 0 else 0
    # work ~= q[:, :rank] @ b with b = r[:rank] with columns un-permuted
    b = np.empty((rank, n))
    b[:, piv] = r[:rank]
    w, v = _hestenes(b.T)                    # b.T @ v = w, b.T is n x rank
    sigma = np.zeros(n)
    sigma[:rank] = np.linalg.norm(w, axis=0)
    order = np.argsort(-sigma[:rank], kind="stable")
    w, v = w[:, order], v[:, order]
    sigma[:rank] = sigma[:rank][order]
    smax = sigma[0] if rank else 0.0
    keep = sigma > rel * smax
    right = np.zeros((n, n))
    right[:, keep] = w[:, keep[:rank]] / sigma[keep]
    left = np.zeros((m, n))
    left[:, :rank] = q[:, :rank] @ v
    sigma = np.where(keep, sigma, 0.0)
    if not keep.all():
        right = _complete_orthonormal(right, keep)
        left_keep = np.zeros(n, dtype=bool)
        left_keep[:rank] = True
        left = _complete_orthonormal(left, left_keep)
    if transposed:
        left, right = right, left
    pivot = np.argmax(np.abs(right), axis=0)
    signs = np.sign(right[pivot, np.arange(right.shape[1])])
    signs[signs == 0] = 1.0
    left = left * signs
    right = right * signs
    return SvdResult(u=left, sigma=sigma, vt=right.T.copy())


def pseudo_inverse(a, rank_tol=1e-10):
    """Moore-Penrose pseudo-inverse; singular values <= rank_tol * sigma_max count as zero."""
    if rank_tol <= 0:
        raise ValueError("rank_tol must be positive")
    a = np.asarray(a, dtype=float)
    m, n = a.shape
    if m == 0 or n == 0:
        return np.zeros((n, m))
    svd = thin_svd(a)
    smax = svd.sigma[0]
    if smax == 0.0:
        return np.zeros((n, m))
    inv = np.zeros_like(svd.sigma)
    big = svd.sigma > rank_tol * smax
    inv[big] = 1.0 / svd.sigma[big]
    return (svd.vt.T * inv) @ svd.u.T


def null_space_projector(a, rank_tol=1e-10):
    """Orthogonal projector ``I - pinv(a) @ a`` onto the null space of ``a``."""
    a = np.asarray(a, dtype=float)
    n = a.shape[1]
    if a.shape[0] == 0:
        return np.eye(n)
    q = np.eye(n) - pseudo_inverse(a, rank_tol) @ a
    return 0.5 * (q + q.T)


def solve_linear_system(a, b, transpose=False, tol=1e-13):
    """Solve ``a x = b`` (or ``a.T x = b``) for square ``a``; ``b`` may be a matrix.

    Raises SingularMatrix when a pivot of the LU factorization is negligible
    relative to the largest one.
    """
    a = np.asarray(a, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError("solve_linear_system needs a square matrix")
    if a.shape[0] == 0:
        return np.zeros_like(np.asarray(b, dtype=float))
    with warnings.catch_warnings():
        # singularity is reported below as SingularMatrix
        warnings.simplefilter("ignore", scipy.linalg.LinAlgWarning)
        lu, piv = scipy.linalg.lu_factor(a, check_finite=False)
    diag = np.abs(np.diag(lu))
    if diag.min() <= tol * max(diag.max(), 1e-300):
        raise SingularMatrix("matrix is singular to working precision")
    return scipy.linalg.lu_solve((lu, piv), b, trans=1 if transpose else 0, check_finite=False)
