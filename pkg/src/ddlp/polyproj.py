"""Euclidean projection onto polyhedra ``{x : A x <= b}`` by Dykstra's algorithm."""
from dataclasses import dataclass

import numpy as np
import scipy.linalg
from scipy.optimize import minimize, nnls

from .errors import ConvergenceFailure, InfeasibleProblem, ShapeError


@dataclass(frozen=True)
class ProjectionConfig:
    tol: float = 1e-7
    max_cycles: int = 10000
    polish_every: int = 10

    def __post_init__(self):
        if self.tol <= 0:
            raise ValueError("tol must be positive")


def _prepare(a, b):
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float).reshape(-1)
    if a.ndim != 2 or a.shape[0] != b.shape[0]:
        raise ShapeError(f"A{a.shape} and b{b.shape} disagree")
    norms2 = np.einsum("ij,ij->i", a, a)
    zero = norms2 == 0.0
    if np.any(b[zero] < 0.0):
        raise InfeasibleProblem("a zero row with negative right-hand side makes the polyhedron empty")
    keep = ~zero
    return a[keep], b[keep], norms2[keep]


def _polish(a, b, p, mu, tol, rounds=8):
    """Exact projection guessed from the rows with positive multipliers.

    Solves the equality-constrained least-distance problem on the guessed
    active rows, then corrects the guess a few times (rows with negative
    multipliers leave, violated rows join). Returns the point once it
    satisfies the KKT conditions, else None.
    """
    act = mu > 0.0
    for _ in range(rounds):
        idx = np.flatnonzero(act)
        if idx.size == 0:
            return None
        sub = a[idx]
        gram = sub @ sub.T
        rhs = sub @ p - b[idx]
        try:
            nu = scipy.linalg.cho_solve(scipy.linalg.cho_factor(gram, check_finite=False), rhs,
                                        check_finite=False)
        except np.linalg.LinAlgError:
            nu, *_ = np.linalg.lstsq(gram, rhs, rcond=None)
        x = p - sub.T @ nu
        resid = a @ x - b
        neg = nu < -tol
        bad = resid > tol
        if not neg.any() and not bad.any():
            if np.max(np.abs(resid[idx])) > tol:
                return None
            return x
        act[idx[neg]] = False
        act |= bad
    return None


def _least_distance(a, b, p, working, tol, rounds=50):
    """Exact projection by least-distance programming over a growing working set.

    With ``z = x - p`` the problem is ``min |z|`` s.t. ``A_W z <= b_W - A_W p``,
    which reduces to one nonnegative least-squares solve. Rows of the full
    system still violated at the solution join the working set. Returns None
    if the working-set system looks infeasible or the rounds run out.
    """
    work = working.copy()
    for _ in range(rounds):
        idx = np.flatnonzero(work)
        sub = a[idx]
        e = np.vstack([-sub.T, (sub @ p - b[idx])[None, :]])
        f = np.zeros(e.shape[0])
        f[-1] = 1.0
        u, _ = nnls(e, f, maxiter=max(100, 10 * e.shape[1]))
        r = e @ u - f
        if r[-1] > -1e-12:
            return None
        x = p - r[:-1] / r[-1]
        violated = a @ x - b > tol
        if not violated.any():
            return x
        if not (violated & ~work).any():
            # only round-off in the working rows: re-solve on the active rows
            mu = np.zeros(a.shape[0])
            mu[idx] = u
            return _polish(a, b, p, mu, tol)
        work |= violated
    return None


def _split_bounds(a, b):
    """Separate single-variable rows into bounds ``lo <= x <= hi``; return the rest."""
    nz = a != 0.0
    single = nz.sum(axis=1) == 1
    n = a.shape[1]
    lo = np.full(n, -np.inf)
    hi = np.full(n, np.inf)
    rows = np.flatnonzero(single)
    j = nz[rows].argmax(axis=1)
    coef = a[rows, j]
    lim = b[rows] / coef
    up = coef > 0.0
    np.minimum.at(hi, j[up], lim[up])
    np.maximum.at(lo, j[~up], lim[~up])
    return lo, hi, a[~single], b[~single]


def _box_dual(bounds, a, b, p, tol, refine=20):
    """Exact projection when most rows are simple bounds.

    Only the general rows ``g x <= h`` get multipliers: for ``nu >= 0`` the
    minimizer over the box is ``x(nu) = clip(p - g^T nu, lo, hi)`` and the
    dual is a smooth concave function of ``nu``. It is maximized with
    L-BFGS-B, then refined by Newton steps on the rows with positive
    multipliers. Returns the point once it passes the KKT checks, else None.
    """
    lo, hi, g, h = bounds
    if np.any(lo > hi):
        return None
    if g.shape[0] == 0:
        return np.clip(p, lo, hi)

    def x_of(nu):
        return np.clip(p - g.T @ nu, lo, hi)

    def neg_dual(nu):
        x = x_of(nu)
        r = g @ x - h
        d = x - p
        return -(0.5 * d @ d + nu @ r), -r

    res = minimize(neg_dual, np.zeros(g.shape[0]), jac=True, method="L-BFGS-B",
                   bounds=[(0.0, None)] * g.shape[0],
                   options={"maxiter": 5000, "gtol": 1e-12, "ftol": 1e-15})
    nu = res.x
    for _ in range(refine):
        x = x_of(nu)
        r = g @ x - h
        if r.max() <= tol and np.all(np.abs(r[nu > 0.0]) <= tol):
            resid = a @ x - b
            return x if resid.max() <= tol else None
        idx = np.flatnonzero((nu > 0.0) | (r > tol))
        gf = g[np.ix_(idx, np.flatnonzero((x > lo) & (x < hi)))]
        step, *_ = np.linalg.lstsq(gf @ gf.T, r[idx], rcond=None)
        nu[idx] = np.maximum(nu[idx] + step, 0.0)
    return None


def _exact_finish(a, b, p, mu, working, bounds, tol):
    exact = _box_dual(bounds, a, b, p, tol) if bounds is not None else None
    if exact is None:
        exact = _polish(a, b, p, mu, tol)
    if exact is None:
        exact = _least_distance(a, b, p, working, tol)
    return exact


class _Groups:
    """Working-set rows partitioned into blocks with pairwise disjoint supports.

    Rows with disjoint supports are orthogonal, so their halfspace projections
    commute and a whole block can be applied at once without changing the
    Dykstra iterates.
    """

    def __init__(self, a):
        self.a = a
        self.support = a != 0.0
        self.members = []      # list of row-index lists
        self.masks = np.zeros((8, a.shape[1]), dtype=bool)   # union of member supports
        self.blocks = []       # cached (idx, rows) per block

    def add(self, rows):
        for i in rows:
            cols = np.flatnonzero(self.support[i])
            used = len(self.members)
            free = np.flatnonzero(~self.masks[:used, cols].any(axis=1))
            if free.size:
                g = free[0]
                self.members[g].append(i)
            else:
                g = used
                if g == self.masks.shape[0]:
                    self.masks = np.vstack([self.masks, np.zeros_like(self.masks)])
                self.members.append([i])
            self.masks[g, cols] = True
        self.blocks = [(np.array(m), self.a[m]) for m in self.members]


def project_point(a, b, p, cfg=None):
    """Closest point to ``p`` in ``{x : a @ x <= b}``.

    Cyclic Dykstra over the halfspaces, finished off by an exact solve once
    the iterates reveal the working set (after ``polish_every`` cycles, then
    at doubling intervals): a bound-separated dual when at least half the
    rows are simple bounds, then an active-set guess, then least-distance
    programming. Points so large that rounding exceeds ``tol`` go straight
    to the exact solve and raise ConvergenceFailure if it fails.

    For a halfspace the Dykstra correction is always a nonnegative multiple
    ``mu_i * a_i`` of its normal, so only the multipliers are stored. Halfspaces that have never been violated have
    ``mu_i == 0`` and their projection step is the identity; they join the
    cycle the first time a full residual check finds them violated.
    """
    cfg = cfg or ProjectionConfig()
    p = np.asarray(p, dtype=float).reshape(-1)
    a, b, norms2 = _prepare(a, b)
    if a.shape[1] != p.shape[0]:
        raise ShapeError(f"point has length {p.shape[0]}, constraints expect {a.shape[1]}")
    if a.shape[0] == 0:
        return p.copy()
    tol = cfg.tol
    x = p.copy()
    mu = np.zeros(a.shape[0])
    resid = a @ x - b
    if resid.max() <= tol:
        return x
    in_working = resid > 0.0
    bounds = _split_bounds(a, b)
    if bounds[2].shape[0] > a.shape[0] // 2:
        bounds = None
    if np.finfo(float).eps * np.abs(p).max() > tol:
        # rounding in the iterates alone exceeds tol, so Dykstra cannot certify convergence
        exact = _exact_finish(a, b, p, mu, in_working, bounds, tol)
        if exact is None:
            raise ConvergenceFailure(f"point of norm {np.abs(p).max():.1e} is too large for tol={tol:g}",
                                     best=x)
        return exact

    groups = _Groups(a)
    groups.add(np.flatnonzero(in_working))
    next_finish, gap = cfg.polish_every, cfg.polish_every
    for cycle in range(1, cfg.max_cycles + 1):
        start = x.copy()
        for idx, rows in groups.blocks:
            t = np.maximum((rows @ x - b[idx]) / norms2[idx] + mu[idx], 0.0)
            x += (mu[idx] - t) @ rows
            mu[idx] = t
        resid = a @ x - b
        violated = np.flatnonzero((resid > 0.0) & ~in_working)
        if violated.size:
            in_working[violated] = True
            groups.add(violated)
        move = np.linalg.norm(x - start)
        if max(move, resid.max()) <= tol:
            exact = _polish(a, b, p, mu, tol)
            return exact if exact is not None else x
        if cycle == next_finish:
            exact = _exact_finish(a, b, p, mu, in_working, bounds, tol)
            if exact is not None:
                return exact
            gap *= 2    # failed finishes are costly; back off
            next_finish += gap
    raise ConvergenceFailure(f"Dykstra projection did not converge in {cfg.max_cycles} cycles", best=x)


def project_columns(a, b, pm, cfg=None):
    """Project every column of a projection matrix onto ``{x : a @ x <= b}``.

    Columns are handled independently; the result keeps the method tag.
    """
    from .projection import ProjectionMatrix

    mat = pm.p if isinstance(pm, ProjectionMatrix) else np.asarray(pm, dtype=float)
    out = np.empty_like(mat)
    for j in range(mat.shape[1]):
        try:
            out[:, j] = project_point(a, b, mat[:, j], cfg)
        except ConvergenceFailure as exc:
            raise ConvergenceFailure(f"column {j}: {exc}", best=exc.best, column=j) from exc
    if isinstance(pm, ProjectionMatrix):
        return ProjectionMatrix(out, pm.method_tag)
    return out
