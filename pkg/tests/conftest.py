import numpy as np
import pytest

from mirrorpdmm.geometry import FeasibleSet
from mirrorpdmm.graph import AveragingMatrix, Graph, gen_erdos_renyi
from mirrorpdmm.problem import ProblemInstance


def random_averaging(m: int, seed: int, p_edge: float = 0.5) -> AveragingMatrix:
    """P = I - L(w) with random edge weights scaled to max weighted degree 1/2.

    Diagonal >= 1/2 and off-diagonal row sums <= 1/2, so P is PSD by Gershgorin.
    """
    graph = gen_erdos_renyi(m, p_edge, seed)
    rng = np.random.default_rng(seed)
    weights = rng.uniform(0.1, 1.0, len(graph.edges))
    lap = graph.laplacian(weights)
    lap *= 0.5 / np.max(np.diag(lap))
    return AveragingMatrix(np.eye(m) - lap)


def random_simplex_stack(rng: np.random.Generator, m: int, n: int) -> np.ndarray:
    return rng.dirichlet(np.ones(n), size=m)


@pytest.fixture
def rng():
    return np.random.default_rng(20240601)


@pytest.fixture
def k2_graph():
    return Graph.complete(2)


@pytest.fixture
def k2_averaging():
    return AveragingMatrix(np.full((2, 2), 0.5))


@pytest.fixture
def k2_problem():
    return ProblemInstance.from_costs(np.array([[1.0, 2.0], [3.0, 0.0]]))


@pytest.fixture
def small_problem(rng):
    return ProblemInstance.from_costs(rng.standard_normal((6, 8)))


@pytest.fixture
def small_averaging():
    return random_averaging(6, seed=3)


@pytest.fixture
def free_problem(rng):
    costs = rng.standard_normal((6, 5))
    costs -= costs.mean(axis=0)
    return ProblemInstance.from_costs(costs, FeasibleSet.free(5))
