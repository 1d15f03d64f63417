"""Projected LPs: build ``max (P^T c) @ y s.t. (A P) y <= b``, solve, and recover ``x = P y``."""
import math
from dataclasses import dataclass

import numpy as np

from .errors import ShapeError
from .lp import LpInstance, solve_lp

METHOD_TAGS = ("pca", "sga", "colrand", "custom")
RATIO_GUARD = 1e-9


@dataclass(frozen=True, eq=False)
class ProjectionMatrix:
    """Dense ``n x k`` matrix whose column span hosts candidate solutions."""

    p: np.ndarray
    method_tag: str = "custom"

    def __post_init__(self):
        p = np.asarray(self.p, dtype=float)
        if p.ndim != 2:
            raise ShapeError("projection matrix must be 2-D")
        n, k = p.shape
        if not 1 <= k <= n:
            raise ShapeError(f"need 1 <= k <= n, got n={n}, k={k}")
        if not np.all(np.isfinite(p)):
            raise ValueError("projection matrix has non-finite entries")
        if self.method_tag not in METHOD_TAGS:
            raise ValueError(f"unknown method tag {self.method_tag!r}")
        object.__setattr__(self, "p", p)

    @property
    def n(self):
        return self.p.shape[0]

    @property
    def k(self):
        return self.p.shape[1]

    def prefix(self, k):
        """The first ``k`` columns as a new matrix with the same tag."""
        return ProjectionMatrix(self.p[:, :k].copy(), self.method_tag)

    def __eq__(self, other):
        if not isinstance(other, ProjectionMatrix):
            return NotImplemented
        return self.method_tag == other.method_tag and np.array_equal(self.p, other.p)

    __hash__ = None


@dataclass
class EvalRecord:
    u_value: float
    full_value: float = None
    ratio: float = math.nan        # NaN marks an undefined ratio
    solve_time: float = 0.0        # seconds
    feasible: bool = True


def _matrix(pm):
    return pm.p if isinstance(pm, ProjectionMatrix) else np.asarray(pm, dtype=float)


def build_projected(inst, pm):
    p = _matrix(pm)
    if p.ndim != 2 or p.shape[0] != inst.n:
        raise ShapeError(f"projection has {p.shape[0]} rows but the LP has {inst.n} variables")
    return LpInstance(p.T @ inst.c, inst.a @ p, inst.b, id=inst.id)


def evaluate_u(inst, pm, cfg=None):
    """Solve the projected LP; the optimal value is u(P, instance).

    The returned solution carries the reduced primal ``y`` and the duals of
    the ``m`` original rows, which is what the gradient needs.
    """
    return solve_lp(build_projected(inst, pm), cfg)


def recover(inst, pm, y):
    p = _matrix(pm)
    y = np.asarray(y, dtype=float).reshape(-1)
    if y.shape[0] != p.shape[1]:
        raise ShapeError(f"y has length {y.shape[0]}, expected {p.shape[1]}")
    return p @ y


def objective_ratio(u_value, full_value, guard=RATIO_GUARD):
    """``u / full``; 1 when both are within ``guard`` of zero, NaN when undefined."""
    if guard <= 0:
        raise ValueError("guard must be positive")
    if full_value > guard:
        return u_value / full_value
    if abs(full_value) <= guard and abs(u_value) <= guard:
        return 1.0
    return math.nan
