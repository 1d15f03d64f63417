"""Inequality-form LPs: ``maximize c @ x subject to A @ x <= b`` with free ``x``.

``solve_lp`` is a dense tableau primal simplex returning primal and dual
optimal solutions; ``brute_force_solve`` enumerates vertices and serves as a
test oracle for small instances.
"""
import enum
import itertools
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.optimize
from scipy.linalg.blas import dger

from . import densela
from .errors import NumericalFailure, OracleTooLarge, ShapeError, SingularMatrix


class Status(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True, eq=False)
class LpInstance:
    c: np.ndarray
    a: np.ndarray
    b: np.ndarray
    id: str = ""

    def __post_init__(self):
        c = np.asarray(self.c, dtype=float).reshape(-1)
        b = np.asarray(self.b, dtype=float).reshape(-1)
        a = np.asarray(self.a, dtype=float)
        if a.size == 0:
            a = a.reshape(b.shape[0], c.shape[0])
        if a.ndim != 2 or a.shape != (b.shape[0], c.shape[0]):
            raise ShapeError(f"inconsistent LP shapes: c{c.shape} A{a.shape} b{b.shape}")
        for name, arr in (("c", c), ("A", a), ("b", b)):
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"{name} has non-finite entries")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def m(self):
        return self.a.shape[0]

    @property
    def n(self):
        return self.a.shape[1]

    def __eq__(self, other):
        if not isinstance(other, LpInstance):
            return NotImplemented
        return (self.id == other.id and np.array_equal(self.c, other.c)
                and self.a.shape == other.a.shape and np.array_equal(self.a, other.a)
                and np.array_equal(self.b, other.b))

    __hash__ = None


@dataclass
class LpSolution:
    status: Status
    x: np.ndarray = None
    lam: np.ndarray = None
    objective: float = None
    pivots: int = 0

    @property
    def optimal(self):
        return self.status is Status.OPTIMAL


@dataclass(frozen=True)
class SolverConfig:
    feas_tol: float = 1e-7
    dual_tol: float = 1e-6
    max_pivots: int = None          # default scales with problem size
    pivot_rule: str = "dantzig_with_bland_fallback"
    refactor_every: int = 64
    pivot_tol: float = 1e-9

    def __post_init__(self):
        if self.feas_tol <= 0 or self.dual_tol <= 0:
            raise ValueError("tolerances must be positive")
        if self.pivot_rule != "dantzig_with_bland_fallback":
            raise ValueError(f"unknown pivot rule {self.pivot_rule!r}")


def scale_of(c):
    return max(1.0, float(np.abs(c).max())) if c.size else 1.0


def check_feasible(inst, x, tol=1e-6):
    x = np.asarray(x, dtype=float)
    if x.shape != (inst.n,):
        raise ShapeError(f"expected a vector of length {inst.n}, got {x.shape}")
    if inst.m == 0:
        return True
    return bool(np.all(inst.a @ x <= inst.b + tol))


class _Tableau:
    """Dense simplex tableau over ``n_free`` free columns followed by nonnegative ones.

    ``t`` holds ``B^-1 M`` for the full column matrix ``M``, ``rhs`` the basic
    values and ``d`` the reduced costs ``obj - obj_B B^-1 M``.
    """

    def __init__(self, cols, rhs, basis, n_free, max_pivots):
        self.cols = cols
        self.b = rhs.copy()
        self.basis = list(basis)
        self.n_free = n_free
        self.t = cols.copy()
        self.rhs = rhs.copy()
        self.max_pivots = max_pivots
        self.pivots = 0
        self.bland = False
        self.stall = 0

    def set_objective(self, obj):
        self.obj = obj
        self.refactor()

    def refactor(self):
        bmat = self.cols[:, self.basis]
        self.t = np.asfortranarray(densela.solve_linear_system(bmat, self.cols))
        self.rhs = densela.solve_linear_system(bmat, self.b)
        self.t[:, self.basis] = np.eye(len(self.basis))
        self._update_costs()

    def _update_costs(self):
        ob = self.obj[self.basis]
        self.d = self.obj - ob @ self.t
        self.d[self.basis] = 0.0
        self.value = ob @ self.rhs

    def pivot(self, r, j):
        prow = self.t[r] / self.t[r, j]
        prhs = self.rhs[r] / self.t[r, j]
        col = self.t[:, j].copy()
        col[r] = 0.0
        if self.t.flags.f_contiguous:
            self.t = dger(-1.0, col, prow, a=self.t, overwrite_a=1)
        else:
            self.t -= np.outer(col, prow)
        self.t[r] = prow
        self.rhs -= col * prhs
        self.rhs[r] = prhs
        dj = self.d[j]
        self.d -= dj * prow
        self.d[j] = 0.0
        self.value += dj * prhs
        self.basis[r] = j
        self.pivots += 1
        if self.pivots % self.refactor_every == 0:
            self.refactor()

    refactor_every = 64

    def run(self, price_tol, piv_tol=1e-9, stall_limit=None):
        """Primal simplex iterations. Returns "optimal" or "unbounded"."""
        m = self.t.shape[0]
        ncol = self.t.shape[1]
        stall_limit = stall_limit or 3 * (m + ncol)
        is_free_col = np.zeros(ncol, dtype=bool)
        is_free_col[: self.n_free] = True
        while True:
            score = np.where(is_free_col, np.abs(self.d), self.d)
            score[self.basis] = 0.0
            if self.bland:
                cand = np.flatnonzero(score > price_tol)
                if cand.size == 0:
                    return "optimal"
                j = int(cand[0])
            else:
                j = int(np.argmax(score))
                if score[j] <= price_tol:
                    return "optimal"
            direction = 1.0 if self.d[j] > 0 else -1.0
            col = direction * self.t[:, j]
            basis = np.asarray(self.basis)
            limiting = (col > piv_tol) & (basis >= self.n_free)
            rows = np.flatnonzero(limiting)
            if rows.size == 0:
                return "unbounded"
            ratios = np.maximum(self.rhs[rows], 0.0) / col[rows]
            best = ratios.min()
            ties = rows[ratios <= best + 1e-12 * max(1.0, best)]
            if self.bland:
                r = int(ties[np.argmin(basis[ties])])
            else:
                r = int(ties[np.argmax(col[ties])])
            if self.pivots >= self.max_pivots:
                raise NumericalFailure(f"simplex pivot cap {self.max_pivots} exceeded")
            if best * abs(self.d[j]) <= 1e-12 * max(1.0, abs(self.value)):
                self.stall += 1
                if self.stall > stall_limit:
                    self.bland = True
            else:
                self.stall = 0
            self.pivot(r, j)


def _crash(a, b):
    """Pick (row, column) pairs making free columns basic at the origin.

    Only rows with ``b == 0`` are used, so the crashed basis keeps the origin
    as its basic solution and stays feasible. Independent rows and columns are
    chosen by QR with column pivoting.
    """
    zero_rows = np.flatnonzero(b == 0.0)
    if zero_rows.size == 0:
        return []
    sub = a[zero_rows]
    _, rfac, rows = scipy.linalg.qr(sub.T, mode="economic", pivoting=True)
    diag = np.abs(np.diag(rfac))
    if diag.size == 0 or diag[0] == 0.0:
        return []
    rank = int(np.sum(diag > 1e-9 * diag[0]))
    rows = rows[:rank]
    _, rfac2, cols = scipy.linalg.qr(sub[rows], mode="economic", pivoting=True)
    return list(zip(zero_rows[rows].tolist(), cols[:rank].tolist()))


def solve_lp(inst, cfg=None):
    """Solve ``max c@x s.t. A@x <= b`` with free ``x`` by primal simplex.

    Free variables are handled as implicit ``x+ - x-`` pairs: only one of the
    two (negated) columns is ever stored. Slacks start basic; when ``b`` has
    negative entries a phase-1 pass with a single artificial column first
    finds a feasible basis. Duals are the simplex multipliers on the slack
    rows and are nonnegative at optimality.
    """
    cfg = cfg or SolverConfig()
    m, n = inst.m, inst.n
    a, b, c = inst.a, inst.b, inst.c
    price_tol = 1e-9 * scale_of(c)

    # all-zero rows carry no information: 0 <= b_i or infeasible
    nonzero = np.any(a != 0.0, axis=1) if m else np.zeros(0, dtype=bool)
    if np.any(b[~nonzero] < -cfg.feas_tol):
        return LpSolution(Status.INFEASIBLE)
    rows = np.flatnonzero(nonzero)
    ar, br = a[rows], b[rows]
    mr = ar.shape[0]

    if mr == 0:
        if np.any(np.abs(c) > price_tol):
            return LpSolution(Status.UNBOUNDED)
        return LpSolution(Status.OPTIMAL, x=np.zeros(n), lam=np.zeros(m), objective=0.0)

    max_pivots = cfg.max_pivots or 50 * (mr + n) + 1000
    pivots = 0
    # a tiny pivot can leave the final basis primal infeasible; retry with
    # stricter pivot tolerances before giving up
    for piv_tol in (cfg.pivot_tol, 1e-7, 1e-5):
        if piv_tol < cfg.pivot_tol:
            continue
        sol = _simplex(ar, br, c, cfg, price_tol, piv_tol, max_pivots - pivots)
        pivots += sol.pivots
        if sol.status is not Status.OPTIMAL:
            return LpSolution(sol.status, pivots=pivots)
        if sol.x is not None:
            lam = np.zeros(m)
            lam[rows] = sol.lam
            return LpSolution(Status.OPTIMAL, x=sol.x, lam=lam, objective=sol.objective,
                              pivots=pivots)
    raise NumericalFailure("simplex could not reach a verified optimal basis")


def _simplex(ar, br, c, cfg, price_tol, piv_tol, max_pivots):
    """Two-phase primal simplex on the presolved rows.

    Returns an OPTIMAL solution with ``x = None`` when the final basis is
    singular or fails the primal or dual feasibility check after
    refactorization.
    """
    mr, n = ar.shape
    if max_pivots <= 0:
        raise NumericalFailure("simplex pivot cap exceeded")
    need_phase1 = br.min() < 0.0
    cols = np.hstack([ar, np.eye(mr)])
    if need_phase1:
        cols = np.hstack([cols, -np.ones((mr, 1))])
    basis = list(range(n, n + mr))
    if not need_phase1:
        for r, j in _crash(ar, br):
            basis[r] = j
    tab = _Tableau(cols, br, basis, n, max_pivots)
    tab.refactor_every = cfg.refactor_every
    ncol = cols.shape[1]

    if need_phase1:
        art = ncol - 1
        obj1 = np.zeros(ncol)
        obj1[art] = -1.0
        tab.set_objective(obj1)
        tab.pivot(int(np.argmin(br)), art)
        tab.run(price_tol=1e-9, piv_tol=piv_tol)
        tab.refactor()
        if tab.value < -cfg.feas_tol * max(1.0, float(np.abs(br).max())):
            return LpSolution(Status.INFEASIBLE, pivots=tab.pivots)
        if art in tab.basis:
            r = tab.basis.index(art)
            cand = np.flatnonzero(np.abs(tab.t[r, :art]) > 1e-9)
            cand = [j for j in cand if j not in tab.basis]
            j = max(cand, key=lambda j: abs(tab.t[r, j]))
            tab.pivot(r, j)
        keep = list(range(art))
        tab.cols = tab.cols[:, keep]
        tab.t = tab.t[:, keep]
        tab.bland = False
        tab.stall = 0

    obj = np.zeros(n + mr)
    obj[:n] = c
    tab.set_objective(obj)
    if not need_phase1 and np.any(tab.rhs[np.asarray(tab.basis) >= n] < -cfg.feas_tol):
        tab.basis = list(range(n, n + mr))
        tab.set_objective(obj)
    outcome = tab.run(price_tol=price_tol, piv_tol=piv_tol)
    if outcome == "unbounded":
        return LpSolution(Status.UNBOUNDED, pivots=tab.pivots)

    bmat = tab.cols[:, tab.basis]
    try:
        xb = densela.solve_linear_system(bmat, br)
        y = densela.solve_linear_system(bmat, obj[tab.basis], transpose=True)
    except SingularMatrix:
        return LpSolution(Status.OPTIMAL, pivots=tab.pivots)
    full = np.zeros(n + mr)
    full[tab.basis] = xb
    x = full[:n]
    bscale = max(1.0, float(np.abs(br).max()))
    dtol = cfg.dual_tol * scale_of(c)
    if ((ar @ x - br).max() > cfg.feas_tol * bscale or y.min() < -dtol
            or np.abs(ar.T @ y - c).max() > dtol):
        return LpSolution(Status.OPTIMAL, pivots=tab.pivots)
    return LpSolution(Status.OPTIMAL, x=x, lam=y, objective=float(c @ x), pivots=tab.pivots)


def certificate_errors(inst, sol):
    """Primal, dual and complementarity residuals of an optimal solution."""
    x, lam = sol.x, sol.lam
    slack = inst.b - inst.a @ x
    obj = float(inst.c @ x)
    return {
        "primal": float(max(0.0, -slack.min())) if inst.m else 0.0,
        "dual_sign": float(max(0.0, -lam.min())) if inst.m else 0.0,
        "stationarity": float(np.abs(inst.a.T @ lam - inst.c).max()) if inst.n else 0.0,
        "gap": abs(obj - float(inst.b @ lam)) / max(1.0, abs(obj)),
        "complementarity": float(np.max(np.abs(lam * slack))) if inst.m else 0.0,
    }


# ---------------------------------------------------------------------------
# brute-force oracle

ORACLE_MAX_N = 8
ORACLE_MAX_M = 16


def brute_force_solve(inst, tol=1e-9):
    """Exact optimum by enumerating every vertex of the feasible region.

    Free variables are reduced to the row space of ``A`` first so the
    constraint matrix has full column rank and the region (if non-empty) has
    a vertex. Unboundedness is decided from the extreme rays of the recession
    cone ``{d : A d <= 0}``, plus any null-space component of ``c``.
    """
    m, n = inst.m, inst.n
    if n > ORACLE_MAX_N or m > ORACLE_MAX_M:
        raise OracleTooLarge(f"oracle limited to n <= {ORACLE_MAX_N}, m <= {ORACLE_MAX_M}")
    a, b, c = inst.a, inst.b, inst.c
    scale = max(1.0, np.abs(a).max() if a.size else 1.0, np.abs(b).max() if b.size else 1.0)
    ftol = tol * scale * max(1, n)

    if m:
        _, s, vt = np.linalg.svd(a)
        rank = int(np.sum(s > 1e-10 * s[0])) if s.size and s[0] > 0 else 0
    else:
        vt, rank = np.eye(n), 0
    row_basis = vt[:rank].T                      # n x r
    null_basis = vt[rank:].T                     # n x (n-r)
    c_null = null_basis.T @ c if null_basis.size else np.zeros(0)
    ar = a @ row_basis                           # m x r, full column rank
    cr = row_basis.T @ c

    best_val, best_z = -np.inf, None
    if rank == 0:
        if np.all(b >= -ftol):
            best_val, best_z = 0.0, np.zeros(0)
    else:
        for subset in itertools.combinations(range(m), rank):
            idx = list(subset)
            sub = ar[idx]
            if abs(np.linalg.det(sub)) < 1e-12:
                continue
            z = np.linalg.solve(sub, b[idx])
            if np.all(ar @ z <= b + ftol):
                val = cr @ z
                if val > best_val:
                    best_val, best_z = val, z
    if best_z is None:
        return LpSolution(Status.INFEASIBLE)
    if c_null.size and np.abs(c_null).max() > 1e-9 * max(1.0, np.abs(c).max()):
        return LpSolution(Status.UNBOUNDED)
    if _has_improving_ray(ar, cr, rank):
        return LpSolution(Status.UNBOUNDED)

    x = row_basis @ best_z
    slack = b - a @ x
    tight = np.flatnonzero(np.abs(slack) <= 1e-7 * scale)
    lam = np.zeros(m)
    if tight.size:
        lam_t, _ = scipy.optimize.nnls(a[tight].T, c)
        lam[tight] = lam_t
    return LpSolution(Status.OPTIMAL, x=x, lam=lam, objective=float(c @ x))


def _has_improving_ray(ar, cr, rank):
    """True if some extreme ray d of {d : ar d <= 0} has cr @ d > 0."""
    m = ar.shape[0]
    if rank == 0:
        return False
    ctol = 1e-9 * max(1.0, np.abs(cr).max())
    for subset in itertools.combinations(range(m), rank - 1):
        if rank > 1:
            sub = ar[list(subset)]
            _, s, vt = np.linalg.svd(sub)
            if np.sum(s > 1e-10 * max(s[0], 1e-300)) < rank - 1:
                continue
            d = vt[-1]
        else:
            d = np.ones(1)
        for sign in (1.0, -1.0):
            ray = sign * d
            if np.all(ar @ ray <= 1e-9) and cr @ ray > ctol:
                return True
    return False
