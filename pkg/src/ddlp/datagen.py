"""Synthetic LP datasets (packing, max-flow, min-cost-flow) and objective perturbation.

Every generator is deterministic in ``GenConfig.seed``: each instance draws
from its own generator seeded by ``(seed, stream, index)``, so instances can
be produced independently and in any order.
"""
import math
from dataclasses import dataclass

import numpy as np

from .densela import null_space_projector
from .lp import LpInstance
from .mpsio import Dataset, DatasetManifest
from .reform import GeneralLp, find_interior_point, remove_equalities

_BASE, _INSTANCE, _OUTLIERS, _OBJECTIVE = 0, 1, 2, 3


@dataclass(frozen=True)
class GenConfig:
    seed: int = 0
    count: int = 300
    noise_level: float = 0.1
    outlier_fraction: float = 0.0
    outlier_scale: float = 10.0
    n_train: int = None             # defaults to two thirds of count
    per_entry: bool = False         # packing: independent multiplier per entry

    def __post_init__(self):
        if not 0.0 <= self.outlier_fraction <= 1.0:
            raise ValueError("outlier_fraction must lie in [0, 1]")
        if self.noise_level < 0:
            raise ValueError("noise_level must be non-negative")
        if self.count < 1:
            raise ValueError("count must be positive")

    @property
    def train_count(self):
        if self.n_train is not None:
            return min(self.n_train, self.count)
        return round(self.count * 2 / 3)


def _rng(cfg, stream, index=0):
    return np.random.default_rng([cfg.seed, stream, index])


def _make_dataset(name, instances, cfg, identical_a):
    ids = [inst.id for inst in instances]
    ntr = cfg.train_count
    manifest = DatasetManifest(name=name, n=instances[0].n, m=instances[0].m,
                               train_ids=ids[:ntr], test_ids=ids[ntr:], identical_a=identical_a)
    return Dataset(manifest, {inst.id: inst for inst in instances})


def _multiplier(rng, cfg, shape):
    return 1.0 + rng.uniform(0.0, cfg.noise_level, size=shape)


def gen_packing(m, n, cfg=None):
    """Packing LPs ``max c@x s.t. A x <= b, x >= 0`` with nonnegative data.

    The base instance has ``c, A, b`` uniform on [0, 1] with ``b`` scaled by
    ``n``. Each instance multiplies the base data by ``1 + w`` with ``w``
    uniform on [0, noise_level], drawn once per instance (default) or per
    entry (``per_entry=True``). A shared ``w`` scales ``A`` and ``b`` alike,
    so every instance has the same feasible region and proportional
    objectives; use per-entry noise for a non-trivial benchmark. Nonnegativity is written as explicit
    ``-x <= 0`` rows, so instances have ``m + n`` constraints.
    """
    cfg = cfg or GenConfig()
    if m < 1 or n < 1:
        raise ValueError("m and n must be positive")
    base = _rng(cfg, _BASE)
    c0 = base.uniform(0, 1, n)
    a0 = base.uniform(0, 1, (m, n))
    b0 = base.uniform(0, 1, m) * n
    nonneg = -np.eye(n)
    instances = []
    for i in range(cfg.count):
        rng = _rng(cfg, _INSTANCE, i)
        if cfg.per_entry:
            c = c0 * _multiplier(rng, cfg, n)
            a = a0 * _multiplier(rng, cfg, (m, n))
            b = b0 * _multiplier(rng, cfg, m)
        else:
            s = _multiplier(rng, cfg, None)
            c, a, b = c0 * s, a0 * s, b0 * s
        instances.append(LpInstance(c, np.vstack([a, nonneg]),
                                    np.concatenate([b, np.zeros(n)]), id=f"packing-{i:04d}"))
    return _make_dataset("packing", instances, cfg, identical_a=False)


def random_digraph(rng, n_vertices, n_arcs, s=0, t=1):
    """Distinct random arcs without self-loops; arc 0 is always ``(s, t)``."""
    if n_arcs > n_vertices * (n_vertices - 1):
        raise ValueError("too many arcs for a simple digraph")
    arcs = [(s, t)]
    seen = {(s, t)}
    while len(arcs) < n_arcs:
        u, v = (int(z) for z in rng.integers(0, n_vertices, size=2))
        if u == v or (u, v) in seen:
            continue
        seen.add((u, v))
        arcs.append((u, v))
    return arcs


def incidence(arcs, n_vertices):
    """Vertex-arc incidence: +1 where the arc leaves the vertex, -1 where it enters."""
    inc = np.zeros((n_vertices, len(arcs)))
    for e, (u, v) in enumerate(arcs):
        inc[u, e] = 1.0
        inc[v, e] = -1.0
    return inc


def maxflow_general(arcs, n_vertices, capacity, s=0, t=1):
    """Max-flow LP over arc flows: conservation equalities, 0 <= flow <= capacity."""
    inc = incidence(arcs, n_vertices)
    inner = [v for v in range(n_vertices) if v not in (s, t)]
    n = len(arcs)
    eye = np.eye(n)
    return GeneralLp(w=inc[s], a_ineq=np.vstack([eye, -eye]),
                     b_ineq=np.concatenate([capacity, np.zeros(n)]),
                     a_eq=inc[inner], b_eq=np.zeros(len(inner)))


def mincostflow_general(arcs, n_vertices, cost, capacity, s=0, t=1):
    """Unit s-t min-cost flow written as maximization of the negated cost."""
    inc = incidence(arcs, n_vertices)
    supply = np.zeros(n_vertices)
    supply[s], supply[t] = 1.0, -1.0
    n = len(arcs)
    eye = np.eye(n)
    return GeneralLp(w=-np.asarray(cost, dtype=float), a_ineq=np.vstack([eye, -eye]),
                     b_ineq=np.concatenate([capacity, np.zeros(n)]), a_eq=inc, b_eq=supply)


def flow_arcs(cfg, n_vertices=50, n_arcs=500):
    """The random graph shared by every instance of a flow dataset."""
    return random_digraph(_rng(cfg, _BASE), n_vertices, n_arcs)


def instance_multipliers(cfg, index, size):
    """The ``1 + w`` factors applied to instance ``index`` of a flow dataset."""
    return _multiplier(_rng(cfg, _INSTANCE, index), cfg, size)


def gen_maxflow(cfg=None, n_vertices=50, n_arcs=500):
    """Max-flow LPs on one random graph with capacities ``1 + w`` per arc.

    Conservation equalities are removed around the zero flow, giving
    inequality-form instances with ``2 * n_arcs`` rows and ``n_arcs``
    variables that share the constraint matrix.
    """
    cfg = cfg or GenConfig()
    arcs = flow_arcs(cfg, n_vertices, n_arcs)
    q = None
    instances = []
    for i in range(cfg.count):
        cap = instance_multipliers(cfg, i, n_arcs)
        g = maxflow_general(arcs, n_vertices, cap)
        if q is None:
            q = null_space_projector(g.a_eq)
        r = remove_equalities(g, np.zeros(n_arcs), projector=q)
        instances.append(LpInstance(r.instance.c, r.instance.a, r.instance.b, id=f"maxflow-{i:04d}"))
    return _make_dataset("maxflow", instances, cfg, identical_a=True)


def gen_mincostflow(cfg=None, n_vertices=50, n_arcs=500):
    """Unit-flow min-cost-flow LPs with unit arc capacities and perturbed costs.

    Base costs are 1 except the direct ``(s, t)`` arc, which costs
    ``10 * n_arcs``. The anchor sends the unit flow along that arc, so the
    reformulated optimum is the saving over the direct route and is never
    negative.
    """
    cfg = cfg or GenConfig()
    arcs = flow_arcs(cfg, n_vertices, n_arcs)
    base_cost = np.ones(n_arcs)
    base_cost[0] = 10.0 * n_arcs
    cap = np.ones(n_arcs)
    x0 = np.zeros(n_arcs)
    x0[0] = 1.0
    q = None
    instances = []
    for i in range(cfg.count):
        cost = base_cost * instance_multipliers(cfg, i, n_arcs)
        g = mincostflow_general(arcs, n_vertices, cost, cap)
        if q is None:
            q = null_space_projector(g.a_eq)
        r = remove_equalities(g, x0, projector=q)
        instances.append(LpInstance(r.instance.c, r.instance.a, r.instance.b,
                                    id=f"mincostflow-{i:04d}"))
    return _make_dataset("mincostflow", instances, cfg, identical_a=True)


def outlier_indices(cfg):
    """Exactly ``floor(outlier_fraction * count)`` instance indices, fixed by the seed."""
    n_out = math.floor(cfg.outlier_fraction * cfg.count + 1e-9)
    if n_out == 0:
        return frozenset()
    chosen = _rng(cfg, _OUTLIERS).choice(cfg.count, size=n_out, replace=False)
    return frozenset(int(i) for i in chosen)


def objective_multipliers(cfg, index, n, outliers=None):
    outliers = outlier_indices(cfg) if outliers is None else outliers
    scale = cfg.noise_level * (cfg.outlier_scale if index in outliers else 1.0)
    omega = _rng(cfg, _OBJECTIVE, index).standard_normal(n)
    return 1.0 + scale * omega


def perturb_objective_netlib(g, cfg, index, outliers=None):
    """Multiply the objective elementwise by ``1 + noise * w`` with standard normal ``w``.

    Outlier instances use ``noise * outlier_scale`` (with the defaults,
    ``1 + w`` instead of ``1 + 0.1 w``). Constraints are untouched.
    """
    return g.with_objective(g.w * objective_multipliers(cfg, index, g.n, outliers))


def gen_from_general(g, cfg=None, name=None, x0=None):
    """Dataset of objective-perturbed copies of ``g`` in origin-feasible inequality form.

    The anchor defaults to the margin-maximizing interior point; the
    equality projector is shared by all instances.
    """
    cfg = cfg or GenConfig(outlier_fraction=0.02)
    if x0 is None:
        x0 = find_interior_point(g)
    q = null_space_projector(g.a_eq)
    outliers = outlier_indices(cfg)
    label = name or g.id or "lp"
    instances = []
    for i in range(cfg.count):
        gi = perturb_objective_netlib(g, cfg, i, outliers)
        r = remove_equalities(gi, x0, projector=q)
        instances.append(LpInstance(r.instance.c, r.instance.a, r.instance.b, id=f"{label}-{i:04d}"))
    return _make_dataset(label, instances, cfg, identical_a=True)
