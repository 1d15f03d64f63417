"""Equality elimination and translation to an origin-feasible inequality form.

Given ``max w@z s.t. A_ineq z <= b_ineq, A_eq z = b_eq`` and a feasible
anchor ``x0``, substituting ``z = Q x + x0`` with the null-space projector
``Q = I - pinv(A_eq) A_eq`` gives the inequality-form LP
``max (Q^T w)@x s.t. (A_ineq Q) x <= b_ineq - A_ineq x0`` for which ``x = 0``
is feasible.
"""
from dataclasses import dataclass, field

import numpy as np

from .densela import null_space_projector
from .errors import AnchorInfeasible, InfeasibleProblem, NumericalFailure, ShapeError
from .lp import LpInstance, SolverConfig, Status, solve_lp

ANCHOR_TOL = 1e-6


@dataclass(frozen=True, eq=False)
class GeneralLp:
    """LP with inequalities, equalities and variable bounds, maximizing ``w @ z``."""

    w: np.ndarray
    a_ineq: np.ndarray
    b_ineq: np.ndarray
    a_eq: np.ndarray = None
    b_eq: np.ndarray = None
    lower: np.ndarray = None
    upper: np.ndarray = None
    id: str = ""
    var_names: tuple = ()
    objective_constant: float = 0.0

    def __post_init__(self):
        w = np.asarray(self.w, dtype=float).reshape(-1)
        n = w.shape[0]

        def mat(x):
            x = np.zeros((0, n)) if x is None else np.asarray(x, dtype=float)
            return x.reshape(-1, n) if x.size == 0 else x

        def vec(x, rows):
            x = np.zeros(rows) if x is None else np.asarray(x, dtype=float).reshape(-1)
            return x

        a_ineq, a_eq = mat(self.a_ineq), mat(self.a_eq)
        b_ineq, b_eq = vec(self.b_ineq, a_ineq.shape[0]), vec(self.b_eq, a_eq.shape[0])
        lower = np.full(n, -np.inf) if self.lower is None else np.asarray(self.lower, dtype=float)
        upper = np.full(n, np.inf) if self.upper is None else np.asarray(self.upper, dtype=float)
        if (a_ineq.shape != (b_ineq.shape[0], n) or a_eq.shape != (b_eq.shape[0], n)
                or lower.shape != (n,) or upper.shape != (n,)):
            raise ShapeError("inconsistent GeneralLp dimensions")
        for arr in (w, a_ineq, b_ineq, a_eq, b_eq):
            if not np.all(np.isfinite(arr)):
                raise ValueError("GeneralLp data must be finite (bounds excepted)")
        if np.any(np.isnan(lower)) or np.any(np.isnan(upper)):
            raise ValueError("bounds must not be NaN")
        for name, val in (("w", w), ("a_ineq", a_ineq), ("b_ineq", b_ineq), ("a_eq", a_eq),
                          ("b_eq", b_eq), ("lower", lower), ("upper", upper)):
            object.__setattr__(self, name, val)

    @property
    def n(self):
        return self.w.shape[0]

    def with_objective(self, w):
        return GeneralLp(w, self.a_ineq, self.b_ineq, self.a_eq, self.b_eq, self.lower,
                         self.upper, self.id, self.var_names, self.objective_constant)


def fold_bounds(g):
    """Inequality rows of ``g`` with finite variable bounds appended as rows."""
    n = g.n
    eye = np.eye(n)
    up = np.flatnonzero(np.isfinite(g.upper))
    lo = np.flatnonzero(np.isfinite(g.lower))
    a = np.vstack([g.a_ineq, eye[up], -eye[lo]])
    b = np.concatenate([g.b_ineq, g.upper[up], -g.lower[lo]])
    return a, b


@dataclass(frozen=True, eq=False)
class Reformulation:
    instance: LpInstance
    projector: np.ndarray
    x0: np.ndarray
    objective_offset: float
    a_eq: np.ndarray = field(default=None, repr=False)
    b_eq: np.ndarray = field(default=None, repr=False)


def remove_equalities(g, x0, tol=ANCHOR_TOL, projector=None):
    """Inequality-form LP equivalent to ``g`` with the anchor ``x0`` moved to the origin.

    ``projector`` may be passed in to reuse ``I - pinv(A_eq) A_eq`` across
    instances that share equality constraints.
    """
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if x0.shape != (g.n,):
        raise ShapeError(f"anchor has length {x0.shape[0]}, LP has {g.n} variables")
    a_ineq, b_ineq = fold_bounds(g)
    slack = b_ineq - a_ineq @ x0
    eq_resid = g.a_eq @ x0 - g.b_eq
    if (slack.size and slack.min() < -tol) or (eq_resid.size and np.abs(eq_resid).max() > tol):
        raise AnchorInfeasible("anchor violates the constraints")
    q = null_space_projector(g.a_eq) if projector is None else projector
    c = q.T @ g.w
    a = a_ineq @ q
    # tiny negative slack within tolerance is clipped so the origin is exactly feasible
    b = np.maximum(slack, 0.0)
    inst = LpInstance(c, a, b, id=g.id)
    return Reformulation(inst, q, x0, float(g.w @ x0), a_eq=g.a_eq, b_eq=g.b_eq)


def recover_original(r, x):
    x = np.asarray(x, dtype=float).reshape(-1)
    if x.shape[0] != r.projector.shape[1]:
        raise ShapeError("dimension mismatch in recover_original")
    return r.projector @ x + r.x0


def _phase1_anchor(g, cfg):
    a_ineq, b_ineq = fold_bounds(g)
    a = np.vstack([a_ineq, g.a_eq, -g.a_eq])
    b = np.concatenate([b_ineq, g.b_eq, -g.b_eq])
    sol = solve_lp(LpInstance(np.zeros(g.n), a, b), cfg)
    if sol.status is Status.INFEASIBLE:
        raise InfeasibleProblem(f"LP {g.id!r} is infeasible")
    if not sol.optimal:
        raise NumericalFailure("phase-1 anchor search failed")
    return sol.x


def find_interior_point(g, cfg=None, max_margin=1.0, return_margin=False):
    """A well-centered feasible point maximizing the uniform normalized slack.

    Solves ``max t s.t. (a_i / |a_i|) z + t <= b_i / |a_i|, A_eq z = b_eq,
    t <= max_margin`` after eliminating the equalities around a phase-1
    anchor. With ``return_margin`` the optimal ``t`` is returned as well.
    """
    cfg = cfg or SolverConfig()
    anchor = _phase1_anchor(g, cfg)
    a_ineq, b_ineq = fold_bounds(g)
    norms = np.linalg.norm(a_ineq, axis=1)
    norms[norms == 0.0] = 1.0
    q = null_space_projector(g.a_eq)
    a_red = a_ineq @ q
    slack = np.maximum(b_ineq - a_ineq @ anchor, 0.0)
    n = g.n
    a = np.vstack([
        np.hstack([a_red, norms[:, None]]),
        np.hstack([np.zeros((1, n)), np.ones((1, 1))]),
    ])
    b = np.concatenate([slack, [max_margin]])
    c = np.zeros(n + 1)
    c[-1] = 1.0
    sol = solve_lp(LpInstance(c, a, b), cfg)
    if not sol.optimal:
        raise NumericalFailure(f"margin LP ended with status {sol.status.value}")
    z = q @ sol.x[:n] + anchor
    if return_margin:
        return z, float(sol.x[-1])
    return z
