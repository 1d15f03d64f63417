import math

import numpy as np
import pytest

from conftest import random_bounded_lp
from ddlp.errors import ShapeError
from ddlp.lp import LpInstance, Status, brute_force_solve, check_feasible, solve_lp
from ddlp.projection import (ProjectionMatrix, build_projected, evaluate_u, objective_ratio,
                             recover)


def test_identity_projection():
    inst = random_bounded_lp(np.random.default_rng(0), 4, 3)
    proj = build_projected(inst, ProjectionMatrix(np.eye(3)))
    np.testing.assert_array_equal(proj.c, inst.c)
    np.testing.assert_array_equal(proj.a, inst.a)
    np.testing.assert_array_equal(proj.b, inst.b)


def test_projected_sizes():
    rng = np.random.default_rng(1)
    inst = LpInstance(rng.uniform(size=500), rng.uniform(size=(50, 500)), np.ones(50))
    proj = build_projected(inst, ProjectionMatrix(rng.standard_normal((500, 5))))
    assert (proj.m, proj.n) == (50, 5)


def test_hand_example():
    inst = LpInstance([1.0, 0.0], np.eye(2), [1.0, 1.0])
    pm = ProjectionMatrix(np.array([[1.0], [2.0]]))
    proj = build_projected(inst, pm)
    np.testing.assert_allclose(proj.c, [1.0])
    np.testing.assert_allclose(proj.a, [[1.0], [2.0]])
    sol = evaluate_u(inst, pm)
    ref = brute_force_solve(proj)
    assert sol.objective == pytest.approx(ref.objective) == pytest.approx(0.5)


@pytest.mark.parametrize("p", [0.5, 1.0, 2.0])
def test_scalar_closed_form(p):
    inst = LpInstance([1.0], [[1.0]], [1.0])
    sol = evaluate_u(inst, ProjectionMatrix(np.array([[p]])))
    assert sol.objective == pytest.approx(1.0)
    assert sol.x[0] == pytest.approx(1.0 / p)


def test_zero_matrix_gives_zero():
    inst = random_bounded_lp(np.random.default_rng(2), 5, 4)
    sol = evaluate_u(inst, ProjectionMatrix(np.zeros((4, 2))))
    assert sol.optimal and sol.objective == 0.0


@pytest.mark.parametrize("seed", range(50))
def test_right_invertible_invariance(seed):
    rng = np.random.default_rng(seed)
    inst = random_bounded_lp(rng, 6, 5)
    p = rng.standard_normal((5, 3))
    m = rng.standard_normal((3, 3)) + 2 * np.eye(3)
    u1 = evaluate_u(inst, ProjectionMatrix(p)).objective
    u2 = evaluate_u(inst, ProjectionMatrix(p @ m)).objective
    assert abs(u1 - u2) <= 1e-6 * max(1.0, abs(u1))


@pytest.mark.parametrize("seed", range(30))
def test_recovered_feasible_and_bounded_ratio(seed):
    rng = np.random.default_rng(100 + seed)
    inst = random_bounded_lp(rng, 8, 6)
    pm = ProjectionMatrix(rng.standard_normal((6, 2)))
    sol = evaluate_u(inst, pm)
    x = recover(inst, pm, sol.x)
    assert check_feasible(inst, x, 1e-6)
    full = solve_lp(inst).objective
    assert sol.objective == pytest.approx(inst.c @ x)
    r = objective_ratio(sol.objective, full)
    if full > 1e-9:
        assert -1e-9 <= r <= 1 + 1e-6
    # appending a column never lowers u
    wider = ProjectionMatrix(np.column_stack([pm.p, rng.standard_normal(6)]))
    assert evaluate_u(inst, wider).objective >= sol.objective - 1e-6


def test_unbounded_projection_surfaces():
    inst = LpInstance([1.0, 0.0], [[0.0, 1.0]], [1.0])
    sol = evaluate_u(inst, ProjectionMatrix(np.array([[1.0], [0.0]])))
    assert sol.status is Status.UNBOUNDED


def test_recover():
    inst = LpInstance([1.0, 1.0, 1.0], np.eye(3), np.ones(3))
    pm = ProjectionMatrix(np.eye(3)[:, :1])
    np.testing.assert_array_equal(recover(inst, pm, np.zeros(1)), np.zeros(3))
    np.testing.assert_array_equal(recover(inst, pm, np.array([3.0])), [3.0, 0, 0])
    with pytest.raises(ShapeError):
        recover(inst, pm, np.zeros(2))


def test_objective_ratio():
    assert objective_ratio(3.0, 3.0) == 1.0
    assert objective_ratio(1.5, 3.0) == 0.5
    assert objective_ratio(0.0, 0.0) == 1.0
    assert math.isnan(objective_ratio(1.0, 0.0))
    assert math.isnan(objective_ratio(1.0, -2.0))
    with pytest.raises(ValueError):
        objective_ratio(1.0, 1.0, guard=0.0)


def test_matrix_validation():
    with pytest.raises(ShapeError):
        ProjectionMatrix(np.zeros((2, 3)))
    with pytest.raises(ShapeError):
        ProjectionMatrix(np.zeros(3))
    with pytest.raises(ValueError):
        ProjectionMatrix(np.full((3, 1), np.inf))
    with pytest.raises(ValueError):
        ProjectionMatrix(np.zeros((3, 1)), "bogus")
    with pytest.raises(ShapeError):
        build_projected(LpInstance([1.0], [[1.0]], [1.0]), ProjectionMatrix(np.ones((2, 1))))


def test_prefix_and_equality():
    p = ProjectionMatrix(np.arange(12.0).reshape(4, 3), "pca")
    assert p.prefix(2) == ProjectionMatrix(np.arange(12.0).reshape(4, 3)[:, :2], "pca")
    assert p != ProjectionMatrix(p.p, "sga")
