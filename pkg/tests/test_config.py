import logging
import math

import numpy as np
import pytest
from pydantic import ValidationError

from mirrorpdmm.config import (
    ExperimentConfig,
    PMatrixKind,
    SolverConfig,
    Variant,
    default_step_size,
)
from mirrorpdmm.errors import ParameterError
from mirrorpdmm.geometry import MirrorKind, NegativeEntropy, SetKind, SquaredEuclidean
from mirrorpdmm.problem import squared_distance


class MaxNormMirror(SquaredEuclidean):
    p = math.inf


def test_default_step_sizes():
    assert default_step_size(NegativeEntropy(), 1000, 1.0, 0.25) == 0.75
    assert default_step_size(SquaredEuclidean(), 1000, 1.0, 0.25) == 0.75
    assert default_step_size(NegativeEntropy(), 10, 2.0, 0.5) == 1.0
    assert default_step_size(MaxNormMirror(), 4, 1.0, 0.1) == pytest.approx(0.15)


@pytest.mark.parametrize("gamma", [0.0, 1.0, 1.5])
def test_gamma_outside_admissible_range(gamma):
    with pytest.raises(ParameterError):
        default_step_size(NegativeEntropy(), 10, 1.0, gamma)


def test_resolve_defaults_to_largest_step():
    params = SolverConfig().resolve(Variant.BREGMAN, 4, 10)
    assert params.tau == 0.75
    assert params.rho == 1.0
    assert params.phi.kind is MirrorKind.NEGATIVE_ENTROPY
    assert params.prox is params.phi
    np.testing.assert_array_equal(params.deltas, np.zeros(4))
    assert params.delta_max == 0.0


def test_resolve_accepts_half_step():
    assert SolverConfig(tau=0.5).resolve("bregman", 4, 10).tau == 0.5


def test_strict_mode_rejects_large_step():
    with pytest.raises(ParameterError):
        SolverConfig(tau=0.8).resolve(Variant.BREGMAN, 4, 10)


def test_relaxed_mode_warns(caplog):
    with caplog.at_level(logging.WARNING, logger="mirrorpdmm.config"):
        params = SolverConfig(tau=0.8, strict=False).resolve(Variant.BREGMAN, 4, 10)
    assert params.tau == 0.8
    assert "outside the proven step regime" in caplog.text


def test_relaxed_mode_in_regime_is_quiet(caplog):
    with caplog.at_level(logging.WARNING, logger="mirrorpdmm.config"):
        SolverConfig(tau=0.5, strict=False).resolve(Variant.BREGMAN, 4, 10)
    assert caplog.text == ""


def test_euclid_resolution_ignores_bregman_settings():
    cfg = SolverConfig(rho=2.0, tau=0.1, delta=0.3, mirror=MirrorKind.NEGATIVE_ENTROPY)
    params = cfg.resolve(Variant.EUCLID, 3, 10)
    assert params.tau == 2.0
    assert params.phi.kind is MirrorKind.SQUARED_EUCLIDEAN
    assert params.prox.kind is MirrorKind.SQUARED_EUCLIDEAN
    assert params.delta_max == 0.0


def test_separate_prox_map():
    cfg = SolverConfig(prox=MirrorKind.SQUARED_EUCLIDEAN)
    assert cfg.mirror_map.kind is MirrorKind.NEGATIVE_ENTROPY
    assert cfg.prox_map.kind is MirrorKind.SQUARED_EUCLIDEAN


def test_per_vertex_deltas():
    cfg = SolverConfig(delta=[0.1, 0.4])
    np.testing.assert_array_equal(cfg.deltas(2), [0.1, 0.4])
    assert cfg.resolve(Variant.BREGMAN, 2, 5).delta_max == 0.4
    with pytest.raises(ParameterError):
        cfg.deltas(3)
    np.testing.assert_array_equal(SolverConfig(delta=0.2).deltas(3), [0.2, 0.2, 0.2])


@pytest.mark.parametrize("delta", [-0.1, [0.1, -0.2]])
def test_negative_delta_rejected(delta):
    with pytest.raises(ValidationError):
        SolverConfig(delta=delta)


@pytest.mark.parametrize(
    "kwargs", [{"rho": 0.0}, {"max_iters": -1}, {"workers": 0}, {"unknown": 1}]
)
def test_solver_config_validation(kwargs):
    with pytest.raises(ValidationError):
        SolverConfig(**kwargs)


def test_solver_config_dump():
    dumped = SolverConfig(delta=[0.5, 0.25]).model_dump(mode="json")
    assert set(dumped) == {
        "rho",
        "tau",
        "delta",
        "gamma",
        "mirror",
        "prox",
        "max_iters",
        "stop_tol",
        "seed",
        "strict",
        "workers",
        "inner_iters",
        "inner_tol",
    }
    assert dumped["delta"] == [0.5, 0.25]
    assert dumped["mirror"] == "negative_entropy"


def test_experiment_defaults():
    cfg = ExperimentConfig()
    assert (cfg.m, cfg.n, cfg.p_edge) == (20, 1000, 0.2)
    assert cfg.variants == [Variant.BREGMAN, Variant.EUCLID]
    assert cfg.feasible is SetKind.PROBABILITY_SIMPLEX
    assert cfg.p_matrix is PMatrixKind.LAPLACIAN
    assert cfg.max_iters == 1000


def test_experiment_horizon_overrides_solver():
    cfg = ExperimentConfig(T_max=5, solver={"max_iters": 50})
    assert cfg.max_iters == 5
    assert cfg.solver_config().max_iters == 5
    assert cfg.solver.max_iters == 50


def test_experiment_runs_half_step_by_default():
    solver = ExperimentConfig().solver_config()
    assert solver.tau == 0.5
    assert solver.resolve(Variant.BREGMAN, 20, 1000).tau == 0.5
    assert ExperimentConfig(solver={"tau": 0.7}).solver_config().tau == 0.7
    assert ExperimentConfig(solver={"rho": 2.0}).solver_config().tau == 1.0
    assert ExperimentConfig(solver={"gamma": 0.6}).solver_config().tau == pytest.approx(0.4)
    assert ExperimentConfig(solver={"gamma": 1.5}).solver_config().tau is None


def test_step_regime():
    assert SolverConfig().resolve(Variant.BREGMAN, 4, 10).in_step_regime
    assert SolverConfig(tau=0.5).resolve(Variant.BREGMAN, 4, 10).in_step_regime
    assert not SolverConfig().resolve(Variant.EUCLID, 4, 10).in_step_regime
    relaxed = SolverConfig(tau=0.8, strict=False).resolve(Variant.BREGMAN, 4, 10)
    assert not relaxed.in_step_regime


@pytest.mark.parametrize(
    "kwargs",
    [
        {"variants": []},
        {"variants": ["admm"]},
        {"m": 1},
        {"p_edge": 0.0},
        {"graph_path": "/nonexistent/graph.json"},
        {"oracle": "mirrorpdmm.problem:missing"},
        {"oracle": "not a path"},
        {"cost_distribution": "uniform"},
        {"thresholds": [0.0]},
    ],
)
def test_experiment_validation(kwargs):
    with pytest.raises(ValidationError):
        ExperimentConfig(**kwargs)


def test_oracle_round_trip():
    cfg = ExperimentConfig(
        oracle="mirrorpdmm.problem:squared_distance", feasible="free_space"
    )
    assert cfg.oracle is squared_distance
    dumped = cfg.model_dump(mode="json")
    assert dumped["oracle"] == "mirrorpdmm.problem:squared_distance"
    assert ExperimentConfig.model_validate(dumped) == cfg


def test_graph_path_must_exist(tmp_path):
    path = tmp_path / "graph.json"
    path.write_text('{"m": 2, "edges": [[0, 1]]}')
    assert ExperimentConfig(m=2, graph_path=path).graph_path == path
