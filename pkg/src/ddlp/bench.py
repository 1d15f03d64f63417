"""Benchmark harness: train projection matrices, evaluate test instances, write CSV.

CSV columns (one row per evaluated test instance)::

    dataset,method,k,instance_id,objective,ratio,solve_time_ms,feasible,seed

``k`` is blank for the full solve, ``ratio`` is blank when undefined and
``seed`` is blank for deterministic methods. ColRand is run once per seed
and followed, for every k, by two summary rows whose ``instance_id`` is
``__mean__`` and ``__std__``; their ``objective`` and ``ratio`` aggregate
the per-seed test means and ``solve_time_ms`` aggregates the per-seed medians.
"""
import csv
import logging
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .errors import BenchmarkAbort, ConfigError
from .learn import (SgaConfig, TrainingSet, final_projection, learn_colrand, learn_pca,
                    learn_sga)
from .lp import SolverConfig, check_feasible, solve_lp
from .mpsio import Dataset, load_dataset
from .projection import build_projected, evaluate_u, objective_ratio, recover

log = logging.getLogger(__name__)

METHODS = ("full", "colrand", "pca", "sga")
CSV_FIELDS = ("dataset", "method", "k", "instance_id", "objective", "ratio",
              "solve_time_ms", "feasible", "seed")
COLRAND_SEEDS = tuple(range(10))
FEAS_TOL = 1e-6


@dataclass
class BenchmarkRecord:
    dataset: str
    method: str
    k: int = None
    instance_id: str = ""
    objective: float = math.nan
    ratio: float = math.nan
    solve_time_ms: float = math.nan
    feasible: bool = True
    seed: int = None

    def as_row(self):
        def num(x):
            return "" if x is None or (isinstance(x, float) and math.isnan(x)) else repr(float(x))

        return {
            "dataset": self.dataset,
            "method": self.method,
            "k": "" if self.k is None else str(self.k),
            "instance_id": self.instance_id,
            "objective": num(self.objective),
            "ratio": num(self.ratio),
            "solve_time_ms": "" if math.isnan(self.solve_time_ms) else f"{self.solve_time_ms:.3f}",
            "feasible": "true" if self.feasible else "false",
            "seed": "" if self.seed is None else str(self.seed),
        }


def k_schedule(n):
    """``k = s, 2s, ...`` with ``s = floor(n/100)`` up to ``floor(n/10)``.

    Small problems (n < 100) use a step of 1 so the schedule is never empty.
    """
    step = max(1, n // 100)
    k_max = max(step, n // 10)
    return list(range(step, k_max + 1, step))


def write_csv(records, path, field_names=CSV_FIELDS):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=field_names, lineterminator="\n")
        writer.writeheader()
        for rec in records:
            writer.writerow(rec.as_row() if hasattr(rec, "as_row") else rec)
    return path


def _as_dataset(ds):
    return ds if isinstance(ds, Dataset) else load_dataset(ds)


def _map(fn, items, workers):
    if workers <= 1:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(fn, items))


def solve_full(instances, cfg=None, workers=1):
    """Full-dimensional solves with timing; aborts on any non-optimal instance.

    Returns ``{id: (solution, milliseconds)}``.
    """
    def one(inst):
        t0 = time.perf_counter()
        sol = solve_lp(inst, cfg)
        ms = 1e3 * (time.perf_counter() - t0)
        if not sol.optimal:
            raise BenchmarkAbort(f"full solve of {inst.id!r} is {sol.status.value}", inst.id)
        return inst.id, (sol, ms)

    return dict(_map(one, instances, workers))


def evaluate_matrix(instances, pm, full, dataset, method, seed=None, cfg=None, workers=1):
    """One BenchmarkRecord per instance for projection matrix ``pm``.

    ``full`` maps instance id to ``(solution, ms)`` from ``solve_full``.
    Only the projected solve is timed.
    """
    def one(inst):
        proj = build_projected(inst, pm)
        t0 = time.perf_counter()
        sol = solve_lp(proj, cfg)
        ms = 1e3 * (time.perf_counter() - t0)
        full_val = full[inst.id][0].objective
        if not sol.optimal:
            log.warning("%s k=%d: projected LP for %s is %s", method, pm.k, inst.id,
                        sol.status.value)
            return BenchmarkRecord(dataset, method, pm.k, inst.id, math.nan, math.nan, ms,
                                   False, seed)
        x = recover(inst, pm, sol.x)
        return BenchmarkRecord(dataset, method, pm.k, inst.id, sol.objective,
                               objective_ratio(sol.objective, full_val), ms,
                               check_feasible(inst, x, FEAS_TOL), seed)

    return _map(one, instances, workers)


def _full_records(test, full, dataset):
    out = []
    for inst in test:
        sol, ms = full[inst.id]
        out.append(BenchmarkRecord(dataset, "full", None, inst.id, sol.objective,
                                   objective_ratio(sol.objective, sol.objective), ms,
                                   check_feasible(inst, sol.x, FEAS_TOL), None))
    return out


def _summary(per_seed, dataset, k):
    obj = np.array([np.nanmean([r.objective for r in recs]) for recs in per_seed])
    rat = np.array([np.nanmean([r.ratio for r in recs]) for recs in per_seed])
    med = np.array([np.median([r.solve_time_ms for r in recs]) for recs in per_seed])
    feas = all(r.feasible for recs in per_seed for r in recs)
    return [BenchmarkRecord(dataset, "colrand", k, "__mean__", obj.mean(), rat.mean(),
                            med.mean(), feas, None),
            BenchmarkRecord(dataset, "colrand", k, "__std__", obj.std(), rat.std(),
                            med.std(), feas, None)]


def run_benchmark(dataset, methods=METHODS, ks=None, seeds=COLRAND_SEEDS, out_path=None,
                  solver_cfg=None, sga_cfg=None, final=True, workers=1):
    """Evaluate each method at each k on the test split and optionally write a CSV.

    ``dataset`` is a Dataset or a dataset directory. PCA is learned once at
    the largest k and truncated, which equals learning at each k. SGA is
    trained separately per k with ``sga_cfg`` (its seed is recorded).
    ``final`` applies the final projection to PCA and SGA matrices.
    Returns the list of records.
    """
    ds = _as_dataset(dataset)
    unknown = set(methods) - set(METHODS)
    if unknown:
        raise ConfigError(f"unknown methods: {sorted(unknown)}")
    name = ds.manifest.name
    n = ds.manifest.n
    ks = sorted(ks) if ks else k_schedule(n)
    if ks[0] < 1 or ks[-1] >= n:
        raise ConfigError(f"k must satisfy 1 <= k < n={n}")
    solver_cfg = solver_cfg or SolverConfig()
    test = ds.test()
    full = solve_full(test, solver_cfg, workers)
    records = []
    if "full" in methods:
        records += _full_records(test, full, name)

    ts = None
    if "pca" in methods or "sga" in methods:
        train_full = solve_full(ds.train(), solver_cfg, workers)
        ts = TrainingSet(ds.train(), [train_full[i.id][0].x for i in ds.train()],
                         ds.manifest.identical_a)

    pca_big = None
    if "pca" in methods:
        pca_big = learn_pca(ts, ks[-1], solver_cfg)
        if final:
            pca_big = final_projection(pca_big, ts)
    for k in ks:
        if "colrand" in methods:
            per_seed = []
            for s in seeds:
                recs = evaluate_matrix(test, learn_colrand(n, k, s), full, name, "colrand", s,
                                       solver_cfg, workers)
                per_seed.append(recs)
                records += recs
            records += _summary(per_seed, name, k)
        if pca_big is not None:
            records += evaluate_matrix(test, pca_big.prefix(k), full, name, "pca", None,
                                       solver_cfg, workers)
        if "sga" in methods:
            cfg = sga_cfg or SgaConfig(solver_cfg=solver_cfg)
            pm = learn_sga(ts, k, cfg)
            if final:
                pm = final_projection(pm, ts, cfg.projection_cfg)
            records += evaluate_matrix(test, pm, full, name, "sga", cfg.seed, solver_cfg,
                                       workers)
    if out_path is not None:
        write_csv(records, out_path)
    return records


GAP_FIELDS = ("dataset", "method", "k", "n_train", "seed", "train_u", "heldout_u", "gap")


@dataclass
class GapRecord:
    dataset: str
    method: str
    k: int
    n_train: int
    seed: int
    train_u: float
    heldout_u: float
    gap: float

    def as_row(self):
        row = {}
        for f in fields(self):
            v = getattr(self, f.name)
            row[f.name] = repr(float(v)) if isinstance(v, float) else str(v)
        return row


def gap_grid(n_available, start=10):
    """Geometric grid ``start, 2*start, ...`` not exceeding ``n_available``."""
    grid, n = [], start
    while n <= n_available:
        grid.append(n)
        n *= 2
    return grid


def _train(method, ts, k, seed, solver_cfg, sga_cfg):
    if method == "pca":
        return learn_pca(ts, k, solver_cfg)
    if method == "sga":
        return learn_sga(ts, k, replace(sga_cfg or SgaConfig(solver_cfg=solver_cfg), seed=seed))
    if method == "colrand":
        return learn_colrand(ts.n, k, seed)
    raise ConfigError(f"gap probe does not support method {method!r}")


def gap_probe(dataset, method="pca", k=None, split_seeds=range(5), grid=None, out_path=None,
              heldout_is_train=False, solver_cfg=None, sga_cfg=None, min_instances=100):
    """Empirical generalization gap ``|mean train u - mean held-out u|`` versus N.

    For every split seed the pooled instances (train and test ids) are
    shuffled; the first N form the training set and, unless
    ``heldout_is_train``, the instances after the largest N are held out,
    so the held-out set is fixed across N within a seed. Matrices are used
    as learned, without the final projection.
    """
    ds = _as_dataset(dataset)
    pool = ds.all()
    if len(pool) < min_instances:
        raise ConfigError(f"gap probe needs at least {min_instances} instances, got {len(pool)}")
    n = ds.manifest.n
    k = k or max(1, n // 100)
    limit = len(pool) if heldout_is_train else len(pool) - 1
    grid = sorted(grid) if grid else gap_grid(len(ds.manifest.train_ids))
    if not grid or grid[-1] > limit or grid[0] < 1:
        raise ConfigError(f"training sizes {grid} exceed the {len(pool)} available instances")
    solver_cfg = solver_cfg or SolverConfig()
    full = {}

    def optimum(inst):
        if inst.id not in full:
            sol = solve_lp(inst, solver_cfg)
            if not sol.optimal:
                raise BenchmarkAbort(f"full solve of {inst.id!r} is {sol.status.value}", inst.id)
            full[inst.id] = sol.x
        return full[inst.id]

    def mean_u(pm, insts):
        vals = []
        for inst in insts:
            sol = evaluate_u(inst, pm, solver_cfg)
            if not sol.optimal:
                raise BenchmarkAbort(f"projected LP for {inst.id!r} is {sol.status.value}",
                                     inst.id)
            vals.append(sol.objective)
        return float(np.mean(vals))

    records = []
    for seed in split_seeds:
        order = np.random.default_rng(seed).permutation(len(pool))
        shuffled = [pool[i] for i in order]
        held = None if heldout_is_train else shuffled[grid[-1]:]
        for n_train in grid:
            train = shuffled[:n_train]
            ts = TrainingSet(train, [optimum(i) for i in train], ds.manifest.identical_a)
            pm = _train(method, ts, k, seed, solver_cfg, sga_cfg)
            tr_u = mean_u(pm, train)
            ho_u = tr_u if heldout_is_train else mean_u(pm, held)
            records.append(GapRecord(ds.manifest.name, method, k, n_train, int(seed), tr_u, ho_u,
                                     abs(tr_u - ho_u)))
    if out_path is not None:
        write_csv(records, out_path, GAP_FIELDS)
    return records
