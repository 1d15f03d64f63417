import numpy as np
import pytest

from ddlp.errors import AnchorInfeasible, InfeasibleProblem, ShapeError
from ddlp.lp import LpInstance, brute_force_solve, check_feasible, solve_lp
from ddlp.reform import (GeneralLp, find_interior_point, fold_bounds, recover_original,
                         remove_equalities)


def random_general(rng, n):
    """Bounded random GeneralLp with one equality row through a known point."""
    z = rng.uniform(0.2, 0.8, n)
    a_ineq = rng.uniform(-1, 1, (2, n))
    b_ineq = a_ineq @ z + rng.uniform(0.1, 0.5, 2)
    a_eq = rng.uniform(-1, 1, (1, n))
    return GeneralLp(rng.uniform(-1, 1, n), a_ineq, b_ineq, a_eq, a_eq @ z,
                     lower=np.zeros(n), upper=np.ones(n))


def original_value(g):
    a, b = fold_bounds(g)
    inst = LpInstance(g.w, np.vstack([a, g.a_eq, -g.a_eq]), np.concatenate([b, g.b_eq, -g.b_eq]))
    return brute_force_solve(inst)


def test_no_equalities_identity():
    rng = np.random.default_rng(0)
    a = rng.standard_normal((3, 2))
    g = GeneralLp([1.0, 2.0], a, np.ones(3))
    r = remove_equalities(g, np.zeros(2))
    np.testing.assert_allclose(r.instance.c, [1.0, 2.0])
    np.testing.assert_allclose(r.instance.a, a)
    np.testing.assert_allclose(r.instance.b, np.ones(3))
    np.testing.assert_allclose(recover_original(r, np.array([0.3, 0.1])), [0.3, 0.1])


def test_projector_example():
    g = GeneralLp([1.0, 0.0], np.zeros((0, 2)), [], [[1.0, 1.0]], [1.0])
    r = remove_equalities(g, np.array([0.5, 0.5]))
    np.testing.assert_allclose(r.projector, [[0.5, -0.5], [-0.5, 0.5]], atol=1e-12)
    np.testing.assert_allclose(r.instance.c, [0.5, -0.5], atol=1e-12)
    assert r.objective_offset == pytest.approx(0.5)
    np.testing.assert_allclose(recover_original(r, np.zeros(2)), [0.5, 0.5])


@pytest.mark.parametrize("seed", range(30))
def test_round_trip_value(seed):
    rng = np.random.default_rng(seed)
    g = random_general(rng, int(rng.integers(2, 5)))
    x0 = find_interior_point(g)
    r = remove_equalities(g, x0)
    q = r.projector
    assert np.linalg.norm(q @ q - q) <= 1e-8 and np.allclose(q, q.T, atol=1e-12)
    assert r.instance.b.min() >= 0.0
    ref = original_value(g)
    red = brute_force_solve(r.instance)
    assert ref.optimal and red.optimal
    assert abs(red.objective + r.objective_offset - ref.objective) <= 1e-6
    sol = solve_lp(r.instance)
    z = recover_original(r, sol.x)
    assert np.abs(g.a_eq @ z - g.b_eq).max() <= 1e-8
    a, b = fold_bounds(g)
    assert np.all(a @ z <= b + 1e-6)


def test_anchor_infeasible():
    g = GeneralLp([1.0], [[1.0]], [1.0])
    with pytest.raises(AnchorInfeasible):
        remove_equalities(g, np.array([2.0]))
    g = GeneralLp([1.0, 1.0], np.zeros((0, 2)), [], [[1.0, 1.0]], [1.0])
    with pytest.raises(AnchorInfeasible):
        remove_equalities(g, np.zeros(2))
    with pytest.raises(ShapeError):
        remove_equalities(g, np.zeros(3))


def test_interior_unit_box():
    g = GeneralLp([0.0, 0.0], np.zeros((0, 2)), [], lower=np.zeros(2), upper=np.ones(2))
    x0, t = find_interior_point(g, return_margin=True)
    np.testing.assert_allclose(x0, [0.5, 0.5], atol=1e-9)
    assert t == pytest.approx(0.5)


def test_interior_box_with_equality():
    g = GeneralLp([0.0, 0.0], np.zeros((0, 2)), [], [[1.0, 1.0]], [1.0],
                  lower=np.zeros(2), upper=np.ones(2))
    x0, t = find_interior_point(g, return_margin=True)
    assert x0.sum() == pytest.approx(1.0)
    assert t == pytest.approx(0.5)


def test_interior_margin_clamped():
    g = GeneralLp([0.0], [[1.0]], [0.0])          # half line, unbounded margin
    x0, t = find_interior_point(g, return_margin=True)
    assert t == pytest.approx(1.0)
    assert x0[0] <= -1.0 + 1e-9


def test_interior_infeasible():
    g = GeneralLp([1.0], [[1.0], [-1.0]], [-1.0, 0.0])
    with pytest.raises(InfeasibleProblem):
        find_interior_point(g)


def test_fold_bounds_skips_infinite():
    g = GeneralLp([1.0, 1.0], np.zeros((0, 2)), [], lower=[0.0, -np.inf], upper=[np.inf, 3.0])
    a, b = fold_bounds(g)
    np.testing.assert_array_equal(a, [[0.0, 1.0], [-1.0, 0.0]])
    np.testing.assert_array_equal(b, [3.0, 0.0])


def test_general_lp_validation():
    with pytest.raises(ShapeError):
        GeneralLp([1.0, 1.0], [[1.0]], [1.0])
    with pytest.raises(ValueError):
        GeneralLp([np.nan], [[1.0]], [1.0])


def test_origin_feasible_after_reform():
    rng = np.random.default_rng(5)
    g = random_general(rng, 4)
    r = remove_equalities(g, find_interior_point(g))
    assert check_feasible(r.instance, np.zeros(4), tol=0.0)
