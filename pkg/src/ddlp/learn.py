"""Learning projection matrices from training LPs.

* ``learn_pca``: mean of the training optima followed by the top principal
  directions of the centered optima.
* ``learn_sga``: stochastic gradient ascent on the projected optimal value,
  projecting the columns onto each instance's feasible region first.
* ``learn_colrand``: k random coordinate vectors (baseline).
* ``final_projection``: project every column onto the intersection of all
  training feasible regions.
"""
import logging
from dataclasses import dataclass, field

import numpy as np

from .densela import thin_svd
from .errors import (ConvergenceFailure, MissingCertificate, NumericalFailure, ShapeError)
from .lp import SolverConfig, Status, check_feasible, solve_lp
from .polyproj import ProjectionConfig, project_columns
from .projection import ProjectionMatrix, evaluate_u

log = logging.getLogger(__name__)


@dataclass
class TrainingSet:
    instances: list
    solutions: list = None
    identical_a: bool = False

    def __post_init__(self):
        if not self.instances:
            raise ValueError("training set is empty")
        n = self.instances[0].n
        if any(inst.n != n for inst in self.instances):
            raise ShapeError("training instances must share the number of variables")

    @property
    def n(self):
        return self.instances[0].n

    def __len__(self):
        return len(self.instances)

    def ensure_solutions(self, cfg=None):
        """Fill in missing optimal solutions with the simplex solver (cached)."""
        if self.solutions is None:
            self.solutions = [None] * len(self.instances)
        for i, inst in enumerate(self.instances):
            if self.solutions[i] is None:
                sol = solve_lp(inst, cfg)
                if not sol.optimal:
                    raise NumericalFailure(f"training instance {inst.id!r} is {sol.status.value}")
                self.solutions[i] = sol.x
        return np.vstack(self.solutions)

    def check_solutions(self, tol=1e-6, cfg=None):
        """Indices of stored solutions that are infeasible or suboptimal beyond ``tol``."""
        bad = []
        for i, inst in enumerate(self.instances):
            x = None if self.solutions is None else self.solutions[i]
            if x is None:
                continue
            x = np.asarray(x, dtype=float)
            ref = solve_lp(inst, cfg)
            if (not check_feasible(inst, x, tol) or not ref.optimal
                    or inst.c @ x < ref.objective - tol * max(1.0, abs(ref.objective))):
                bad.append(i)
        return bad

    def subset(self, indices):
        sols = None if self.solutions is None else [self.solutions[i] for i in indices]
        return TrainingSet([self.instances[i] for i in indices], sols, self.identical_a)


@dataclass(frozen=True)
class SgaConfig:
    learning_rate: float = 0.01
    epochs: int = 1
    init: str = "from_pca"
    seed: int = 0
    projection_cfg: ProjectionConfig = field(default_factory=ProjectionConfig)
    solver_cfg: SolverConfig = field(default_factory=SolverConfig)
    skip_on_irregular: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.epochs < 1:
            raise ValueError("epochs must be >= 1")
        if self.init not in ("from_pca", "random_gaussian"):
            raise ValueError(f"unknown init {self.init!r}")


def learn_pca(ts, k, cfg=None):
    """``P = [mean, top-(k-1) right singular vectors of the centered optima]``.

    Directions beyond the numerical rank of the centered data are zero
    columns. Because the SVD is deterministic, ``learn_pca(ts, k)`` is a
    column prefix of ``learn_pca(ts, k + 1)``.
    """
    n = ts.n
    if not 1 <= k <= n:
        raise ShapeError(f"need 1 <= k <= n={n}, got k={k}")
    x = ts.ensure_solutions(cfg)
    mean = x.mean(axis=0)
    p = np.zeros((n, k))
    p[:, 0] = mean
    if k > 1:
        centered = x - mean
        scale = max(1.0, float(np.abs(x).max()))
        if np.abs(centered).max() > 1e-12 * scale:
            svd = thin_svd(centered)
            rank_cut = 1e-10 * scale * np.sqrt(max(centered.shape))
            take = min(k - 1, svd.sigma.shape[0])
            for j in range(take):
                if svd.sigma[j] > rank_cut:
                    p[:, j + 1] = svd.vt[j]
    return ProjectionMatrix(p, "pca")


def grad_u(inst, pm, sol):
    """Gradient of u(P, instance) in P: ``(c - A^T lam) y^T``."""
    if sol is None or sol.status is not Status.OPTIMAL or sol.lam is None or sol.x is None:
        raise MissingCertificate("gradient needs an optimal projected solution with duals")
    y = np.asarray(sol.x, dtype=float)
    k = pm.k if isinstance(pm, ProjectionMatrix) else np.asarray(pm).shape[1]
    if y.shape != (k,) or sol.lam.shape != (inst.m,):
        raise ShapeError("solution does not match the projected LP")
    return np.outer(inst.c - inst.a.T @ sol.lam, y)


def learn_sga(ts, k, cfg=None, history=None):
    """Stochastic gradient ascent on u(P, instance), one instance at a time.

    Each step projects the columns of P onto the current instance's feasible
    region, solves the projected LP and moves P along the gradient. Steps
    whose projection or solve fails are skipped when ``cfg.skip_on_irregular``.
    If ``history`` is a list, the mean training u of the current matrix is
    appended after every epoch.
    """
    cfg = cfg or SgaConfig()
    n = ts.n
    if cfg.init == "from_pca":
        p = learn_pca(ts, k, cfg.solver_cfg).p.copy()
    else:
        rng = np.random.default_rng(cfg.seed)
        p = rng.standard_normal((n, k)) / np.sqrt(n)
    for epoch in range(cfg.epochs):
        for inst in ts.instances:
            try:
                p = project_columns(inst.a, inst.b, p, cfg.projection_cfg)
                sol = evaluate_u(inst, p, cfg.solver_cfg)
            except (ConvergenceFailure, NumericalFailure) as exc:
                if not cfg.skip_on_irregular:
                    raise
                log.warning("SGA epoch %d: skipping %s (%s)", epoch, inst.id, exc)
                continue
            if not sol.optimal:
                if not cfg.skip_on_irregular:
                    raise NumericalFailure(f"projected LP for {inst.id!r} is {sol.status.value}")
                log.warning("SGA epoch %d: skipping %s (projected LP %s)", epoch, inst.id,
                            sol.status.value)
                continue
            p = p + cfg.learning_rate * grad_u(inst, p, sol)
        if history is not None:
            history.append(mean_u(ts.instances, p, cfg.solver_cfg))
    return ProjectionMatrix(p, "sga")


def mean_u(instances, pm, cfg=None):
    """Mean optimal value of the projected LPs; NaN if any solve is not optimal."""
    vals = []
    for inst in instances:
        sol = evaluate_u(inst, pm, cfg)
        if not sol.optimal:
            return float("nan")
        vals.append(sol.objective)
    return float(np.mean(vals))


def stacked_constraints(ts):
    """Constraints describing the intersection of all training feasible regions.

    Duplicate rows are merged keeping the smallest right-hand side; with
    identical constraint matrices this is ``A_1 x <= min(b_1, ..., b_N)``.
    """
    if ts.identical_a:
        return ts.instances[0].a, np.min([inst.b for inst in ts.instances], axis=0)
    a = np.vstack([inst.a for inst in ts.instances])
    b = np.concatenate([inst.b for inst in ts.instances])
    a = a + 0.0                        # fold -0.0 into 0.0 so byte keys match
    first = {}
    inverse = np.empty(a.shape[0], dtype=int)
    for i, row in enumerate(a):
        inverse[i] = first.setdefault(row.tobytes(), len(first))
    keep = np.empty(len(first), dtype=int)
    keep[inverse[::-1]] = np.arange(a.shape[0])[::-1]   # first occurrence of each row
    bmin = np.full(len(first), np.inf)
    np.minimum.at(bmin, inverse, b)
    return a[keep], bmin


def final_projection(pm, ts, cfg=None):
    a, b = stacked_constraints(ts)
    return project_columns(a, b, pm, cfg)


def learn_colrand(n, k, seed):
    """k distinct coordinate vectors chosen uniformly at random (sorted by index)."""
    if not 1 <= k < n:
        raise ShapeError(f"need 1 <= k < n, got n={n}, k={k}")
    rng = np.random.default_rng(seed)
    idx = np.sort(rng.choice(n, size=k, replace=False))
    p = np.zeros((n, k))
    p[idx, np.arange(k)] = 1.0
    return ProjectionMatrix(p, "colrand")
