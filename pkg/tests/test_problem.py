import numpy as np
import pytest

from mirrorpdmm.errors import InputError
from mirrorpdmm.geometry import FeasibleSet
from mirrorpdmm.problem import (
    LinearObjective,
    OracleObjective,
    ProblemInstance,
    check_subgradient,
    squared_distance,
)


def test_linear_objective():
    f = LinearObjective([1.0, -2.0, 0.5])
    assert f.n == 3
    assert f.value(np.array([1.0, 1.0, 2.0])) == 0.0
    np.testing.assert_array_equal(f.subgradient(np.zeros(3)), [1.0, -2.0, 0.5])
    with pytest.raises(ValueError):
        f.c[0] = 4.0


@pytest.mark.parametrize("c", [[[1.0, 2.0]], [1.0, np.nan]])
def test_linear_objective_rejects_bad_costs(c):
    with pytest.raises(InputError):
        LinearObjective(c)


def test_squared_distance_oracle():
    f = squared_distance(0, np.array([1.0, 2.0]))
    assert f.value(np.array([1.0, 0.0])) == 2.0
    np.testing.assert_array_equal(f.subgradient(np.array([0.0, 0.0])), [-1.0, -2.0])


@pytest.mark.parametrize("feasible", [FeasibleSet.simplex(4), FeasibleSet.free(4)])
def test_check_subgradient_accepts_convex_oracle(feasible):
    f = squared_distance(0, np.array([0.3, -1.0, 2.0, 0.0]))
    assert check_subgradient(f, feasible) >= -1e-9


def test_check_subgradient_flags_concave_oracle():
    concave = OracleObjective(
        value_fn=lambda x: -float(x @ x),
        subgradient_fn=lambda x: -2.0 * x,
        n=3,
    )
    assert check_subgradient(concave, FeasibleSet.free(3)) < -1e-3


def test_check_subgradient_is_seeded():
    f = squared_distance(0, np.ones(3))
    simplex = FeasibleSet.simplex(3)
    assert check_subgradient(f, simplex, seed=4) == check_subgradient(f, simplex, seed=4)


def test_from_costs_defaults(k2_problem):
    assert k2_problem.m == 2
    assert k2_problem.n == 2
    assert k2_problem.is_linear
    assert k2_problem.feasible == FeasibleSet.simplex(2)
    np.testing.assert_array_equal(k2_problem.costs, [[1.0, 2.0], [3.0, 0.0]])
    assert k2_problem.total_value(np.array([[1.0, 0.0], [0.5, 0.5]])) == 2.5


def test_from_costs_with_factory():
    costs = np.array([[1.0, 0.0], [0.0, 1.0], [0.5, 0.5]])
    problem = ProblemInstance.from_costs(costs, FeasibleSet.free(2), factory=squared_distance)
    assert not problem.is_linear
    np.testing.assert_array_equal(problem.costs, costs)
    assert problem.total_value(np.zeros((3, 2))) == pytest.approx(0.5 + 0.5 + 0.25)


def test_costs_undefined_for_handmade_oracles():
    f = squared_distance(0, np.zeros(2))
    problem = ProblemInstance(2, 2, (f, f), FeasibleSet.free(2))
    with pytest.raises(InputError):
        problem.costs


def test_dimension_checks():
    with pytest.raises(InputError):
        ProblemInstance.from_costs(np.ones(3))
    with pytest.raises(InputError):
        ProblemInstance.from_costs(np.ones((2, 3)), FeasibleSet.simplex(4))
    with pytest.raises(InputError):
        ProblemInstance(2, 3, (LinearObjective(np.ones(3)),), FeasibleSet.simplex(3))
    with pytest.raises(InputError):
        ProblemInstance(
            1, 3, (LinearObjective(np.ones(2)),), FeasibleSet.simplex(3)
        )
