import itertools

import numpy as np
import pytest

from mps_oracle import FIXTURES
from ddlp.datagen import (GenConfig, flow_arcs, gen_from_general, gen_maxflow, gen_mincostflow,
                          gen_packing, instance_multipliers, objective_multipliers,
                          outlier_indices, perturb_objective_netlib, random_digraph)
from ddlp.lp import check_feasible, solve_lp
from ddlp.mpsio import read_mps


def min_cut_value(arcs, cap, n_vertices, s=0, t=1):
    """Max flow via the min-cut theorem: minimum over all s-t vertex cuts."""
    others = [v for v in range(n_vertices) if v not in (s, t)]
    best = np.inf
    for r in range(len(others) + 1):
        for chosen in itertools.combinations(others, r):
            side = {s, *chosen}
            cut = sum(c for (u, v), c in zip(arcs, cap) if u in side and v not in side)
            best = min(best, cut)
    return best


def cheapest_path_cost(arcs, cost, n_vertices, s=0, t=1):
    """Cheapest simple s-t path by exhaustive path enumeration."""
    out = {}
    for e, (u, v) in enumerate(arcs):
        out.setdefault(u, []).append((v, e))
    best = np.inf
    stack = [(s, {s}, 0.0)]
    while stack:
        node, seen, total = stack.pop()
        if node == t:
            best = min(best, total)
            continue
        for v, e in out.get(node, []):
            if v not in seen:
                stack.append((v, seen | {v}, total + cost[e]))
    return best


def test_packing_shapes_and_origin():
    ds = gen_packing(5, 20, GenConfig(count=12, per_entry=True))
    assert len(ds.train()) == 8 and len(ds.test()) == 4
    for inst in ds.all():
        assert (inst.m, inst.n) == (25, 20)
        assert np.all(inst.a[:5] >= 0) and np.all(inst.b >= 0)
        np.testing.assert_array_equal(inst.a[5:], -np.eye(20))
        assert check_feasible(inst, np.zeros(20), tol=1e-9)
    assert not ds.manifest.identical_a


def test_packing_benchmark_size():
    ds = gen_packing(50, 500, GenConfig(count=2, n_train=1))
    inst = ds.all()[0]
    assert inst.n == 500 and inst.m == 550       # 50 packing rows plus x >= 0


@pytest.mark.parametrize("per_entry", [True, False])
def test_packing_zero_noise(per_entry):
    ds = gen_packing(3, 6, GenConfig(count=4, noise_level=0.0, per_entry=per_entry))
    first = ds.all()[0]
    for inst in ds.all()[1:]:
        assert np.array_equal(inst.a, first.a) and np.array_equal(inst.b, first.b)
        assert np.array_equal(inst.c, first.c)


def test_packing_shared_mode_scales_uniformly():
    base = gen_packing(3, 6, GenConfig(count=1, noise_level=0.0, per_entry=False)).all()[0]
    inst = gen_packing(3, 6, GenConfig(count=3, per_entry=False)).all()[2]
    ratio = inst.c / base.c
    assert np.allclose(ratio, ratio[0]) and 1.0 <= ratio[0] <= 1.1
    np.testing.assert_allclose(inst.a[:3] / base.a[:3], ratio[0])


def test_determinism():
    a = gen_packing(4, 10, GenConfig(seed=3, count=5))
    b = gen_packing(4, 10, GenConfig(seed=3, count=5))
    c = gen_packing(4, 10, GenConfig(seed=4, count=5))
    assert all(x == y for x, y in zip(a.all(), b.all()))
    assert not np.array_equal(a.all()[0].c, c.all()[0].c)


def test_digraph():
    arcs = random_digraph(np.random.default_rng(0), 6, 20)
    assert arcs[0] == (0, 1) and len(set(arcs)) == 20
    assert all(u != v for u, v in arcs)
    with pytest.raises(ValueError):
        random_digraph(np.random.default_rng(0), 3, 7)


def test_maxflow_benchmark_size():
    ds = gen_maxflow(GenConfig(count=2, n_train=1))
    inst = ds.all()[0]
    assert (inst.m, inst.n) == (1000, 500)
    assert ds.manifest.identical_a
    assert np.array_equal(ds.all()[0].a, ds.all()[1].a)
    assert np.all(inst.b >= 0)


def test_mincostflow_benchmark_size():
    ds = gen_mincostflow(GenConfig(count=2, n_train=1))
    inst = ds.all()[0]
    assert (inst.m, inst.n) == (1000, 500)
    assert check_feasible(inst, np.zeros(500), tol=1e-9)


@pytest.mark.parametrize("seed", range(5))
def test_tiny_maxflow_matches_min_cut(seed):
    cfg = GenConfig(seed=seed, count=3)
    ds = gen_maxflow(cfg, n_vertices=4, n_arcs=7)
    arcs = flow_arcs(cfg, 4, 7)
    for i, inst in enumerate(ds.all()):
        sol = solve_lp(inst)
        assert sol.optimal
        cut = min_cut_value(arcs, instance_multipliers(cfg, i, 7), 4)
        assert sol.objective == pytest.approx(cut, abs=1e-8)


@pytest.mark.parametrize("seed", range(5))
def test_tiny_mincostflow_matches_paths(seed):
    cfg = GenConfig(seed=seed, count=3)
    n_arcs = 8
    ds = gen_mincostflow(cfg, n_vertices=4, n_arcs=n_arcs)
    arcs = flow_arcs(cfg, 4, n_arcs)
    for i, inst in enumerate(ds.all()):
        cost = np.ones(n_arcs)
        cost[0] = 10.0 * n_arcs
        cost = cost * instance_multipliers(cfg, i, n_arcs)
        sol = solve_lp(inst)
        assert sol.optimal and sol.objective >= -1e-9
        # the reformulated optimum is the saving over the direct (s, t) arc
        assert cost[0] - sol.objective == pytest.approx(cheapest_path_cost(arcs, cost, 4), abs=1e-8)


def test_outlier_count():
    cfg = GenConfig(count=300, outlier_fraction=0.02)
    assert len(outlier_indices(cfg)) == 6
    assert outlier_indices(cfg) == outlier_indices(cfg)
    assert outlier_indices(GenConfig(count=300)) == frozenset()


def test_outlier_variance():
    cfg = GenConfig(count=1, outlier_fraction=1.0)
    draws = objective_multipliers(cfg, 0, 100_000)
    assert abs(draws.var() - 1.0) <= 0.05
    regular = objective_multipliers(GenConfig(count=1), 0, 100_000)
    assert abs(regular.var() - 0.01) <= 0.0005


def test_netlib_perturbation():
    g = read_mps(FIXTURES / "mixed.mps")
    same = perturb_objective_netlib(g, GenConfig(noise_level=0.0, outlier_fraction=0.5), 0)
    np.testing.assert_array_equal(same.w, g.w)
    moved = perturb_objective_netlib(g, GenConfig(), 3)
    assert not np.array_equal(moved.w, g.w)
    np.testing.assert_array_equal(moved.a_ineq, g.a_ineq)
    np.testing.assert_array_equal(moved.b_eq, g.b_eq)


def test_gen_from_general():
    g = read_mps(FIXTURES / "fixed3.mps")
    ds = gen_from_general(g, GenConfig(count=9, outlier_fraction=0.2))
    assert ds.manifest.identical_a and len(ds.all()) == 9
    for inst in ds.all():
        assert check_feasible(inst, np.zeros(inst.n), tol=1e-9)
        assert np.array_equal(inst.a, ds.all()[0].a)


def test_config_validation():
    with pytest.raises(ValueError):
        GenConfig(outlier_fraction=1.5)
    with pytest.raises(ValueError):
        GenConfig(noise_level=-0.1)
    with pytest.raises(ValueError):
        gen_packing(0, 5)
