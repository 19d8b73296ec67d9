from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, NamedTuple, Optional

import numpy as np

from .config import ExperimentConfig, PMatrixKind, SolverConfig, Variant
from .diagnostics import (
    SaddleCertificate,
    TraceCertification,
    certificate_search,
    certify_trace,
    max_cost_norm,
    rate_bounds,
    reference_solution,
)
from .errors import InputError, SolverError, UnboundedProblemError
from .geometry import FeasibleSet, stack_from_dict, stack_to_dict
from .graph import (
    AveragingMatrix,
    Graph,
    build_laplacian_averaging,
    gen_erdos_renyi,
    optimize_averaging_matrix,
)
from .parallel import BlockMapper, block_mapper
from .problem import ProblemInstance
from .rng import make_generator
from .solver import initial_state, run
from .trace import RunTrace
from .utils import format_float, read_json, write_json

logger = logging.getLogger(__name__)

COST_STREAM = 1


class Instance(NamedTuple):
    graph: Graph
    averaging: AveragingMatrix
    problem: ProblemInstance


def standard_normal_costs(m: int, n: int, seed: int) -> np.ndarray:
    return make_generator(seed, stream=COST_STREAM).standard_normal(m * n).reshape(m, n)


def load_graph(path: str | Path) -> Graph:
    """Graph from a graph document or from the ``graph`` key of an instance document."""
    try:
        doc = read_json(path)
        return Graph.from_dict(doc["graph"] if "graph" in doc else doc)
    except (OSError, KeyError, TypeError) as e:
        raise InputError(f"cannot read graph {path}: {e}") from e


def generate_instance(cfg: ExperimentConfig) -> Instance:
    """Graph, averaging matrix and costs, all derived from ``cfg.seed``."""
    if cfg.graph_path is not None:
        graph = load_graph(cfg.graph_path)
        if graph.m != cfg.m:
            raise InputError(f"graph at {cfg.graph_path} has m={graph.m}, config says {cfg.m}")
    else:
        graph = gen_erdos_renyi(cfg.m, cfg.p_edge, cfg.seed)
    if cfg.p_matrix is PMatrixKind.OPTIMIZED:
        averaging = optimize_averaging_matrix(graph, cfg.optimize_iters)
    else:
        averaging = build_laplacian_averaging(graph)
    costs = standard_normal_costs(cfg.m, cfg.n, cfg.seed)
    problem = ProblemInstance.from_costs(
        costs, FeasibleSet(cfg.feasible, cfg.n), factory=cfg.oracle
    )
    return Instance(graph, averaging, problem)


def instance_document(
    instance: Instance, seed: int, p_edge: float
) -> dict[str, Any]:
    return {
        "graph": instance.graph.to_dict(),
        "averaging": instance.averaging.to_dict(),
        "costs": stack_to_dict(instance.problem.costs),
        "seed": seed,
        "p_edge": p_edge,
    }


def write_instance(
    path: str | Path,
    instance: Instance,
    seed: int,
    p_edge: float,
    dumps: Callable[[Any], str] | None = None,
) -> Path:
    return write_json(path, instance_document(instance, seed, p_edge), dumps)


def load_instance(
    path: str | Path, loads: Callable[[str], Any] | None = None
) -> Instance:
    """Read an instance written by :func:`write_instance` (linear costs over the simplex)."""
    try:
        doc = read_json(path, loads)
        graph = Graph.from_dict(doc["graph"])
        averaging = AveragingMatrix.from_dict(doc["averaging"])
        costs = stack_from_dict(doc["costs"])
    except (OSError, KeyError, TypeError) as e:
        raise InputError(f"cannot read instance {path}: {e}") from e
    return Instance(graph, averaging, ProblemInstance.from_costs(costs))


@dataclass
class VariantOutcome:
    trace: Optional[RunTrace]
    certification: Optional[TraceCertification] = None
    error: Optional[str] = None
    path: Optional[Path] = None


@dataclass
class ExperimentResult:
    out_dir: Path
    outcomes: dict[Variant, VariantOutcome] = field(default_factory=dict)
    summary: dict[str, Any] = field(default_factory=dict)

    @property
    def traces(self) -> dict[Variant, RunTrace]:
        return {v: o.trace for v, o in self.outcomes.items() if o.trace is not None}

    @property
    def failed(self) -> bool:
        return any(o.error is not None for o in self.outcomes.values())


def _certificate(instance: Instance) -> Optional[SaddleCertificate]:
    problem = instance.problem
    if not (problem.is_linear and problem.feasible.is_simplex):
        return None
    return certificate_search(problem, instance.averaging)


def _optional(value: Optional[float]) -> Optional[float]:
    return None if value is None or math.isnan(value) else value


def _variant_summary(
    outcome: VariantOutcome, thresholds: list[float]
) -> dict[str, Any]:
    trace = outcome.trace
    summary: dict[str, Any] = {"error": outcome.error}
    if trace is None:
        return summary
    summary.update(
        iterations=trace.iterations,
        stop_reason=trace.stop_reason,
        thresholds=trace.crossings(thresholds),
        final_objective_gap=_optional(trace.last.objective_gap),
        final_consensus_residual=trace.last.consensus_residual,
    )
    if outcome.certification is not None:
        cert = outcome.certification
        summary["certification"] = {
            "worst_descent_slack": cert.worst_descent_slack,
            "v_nonincreasing": cert.v_nonincreasing,
            "residual_sum": cert.residual_sum,
            "v0": cert.v0,
            "saddle_objective_ratio": _optional(cert.saddle_objective_ratio),
            "saddle_consensus_ratio": _optional(cert.saddle_consensus_ratio),
            "uniform_objective_ratio": _optional(cert.uniform_objective_ratio),
            "uniform_consensus_ratio": _optional(cert.uniform_consensus_ratio),
            "descent_applies": cert.descent_applies,
            "holds": cert.holds(),
        }
    return summary


@dataclass(frozen=True)
class _RunContext:
    instance: Instance
    solver_cfg: SolverConfig
    certificate: Optional[SaddleCertificate]
    f_star: float
    m0: float
    lambda2: float


def _certify(ctx: _RunContext, variant: Variant, trace: RunTrace) -> TraceCertification:
    problem, P = ctx.instance.problem, ctx.instance.averaging
    params = ctx.solver_cfg.resolve(variant, problem.m, problem.n)
    bounds = rate_bounds(
        initial_state(problem, P, params.phi),
        params,
        1,
        problem.m,
        problem.n,
        ctx.m0,
        ctx.lambda2,
        ctx.certificate,
        on_simplex=problem.feasible.is_simplex,
    )
    return certify_trace(trace, bounds, descent=params.in_step_regime)


def _run_variant(
    ctx: _RunContext, variant: Variant, mapper: BlockMapper, out: Path
) -> VariantOutcome:
    problem, P = ctx.instance.problem, ctx.instance.averaging
    outcome = VariantOutcome(trace=None)
    try:
        outcome.trace = run(
            problem, P, ctx.solver_cfg, variant, ctx.certificate, ctx.f_star, mapper=mapper
        )
    except SolverError as e:
        logger.exception("Variant %s failed", variant.value)
        outcome.trace, outcome.error = e.trace, str(e)
    if outcome.trace is None:
        return outcome
    outcome.path = outcome.trace.write_csv(out / f"{variant.value}.csv")
    if outcome.trace.iterations and not math.isnan(ctx.m0):
        outcome.certification = _certify(ctx, variant, outcome.trace)
    return outcome


def run_experiment(
    cfg: ExperimentConfig,
    out_dir: str | Path | None = None,
    workers: int | None = None,
    dumps: Callable[[Any], str] | None = None,
) -> ExperimentResult:
    """Run every configured variant on one instance; write ``<variant>.csv`` and ``summary.json``.

    A variant that fails with :class:`SolverError` is logged and recorded in
    the summary; its partial trace is still written and the other variants run.
    """
    out = Path(out_dir or cfg.out_dir or ".")
    out.mkdir(parents=True, exist_ok=True)
    instance = generate_instance(cfg)
    problem = instance.problem
    solver_cfg = cfg.solver_config()
    threads = workers if workers is not None and solver_cfg.workers == 1 else solver_cfg.workers

    try:
        f_star, _ = reference_solution(problem)
    except UnboundedProblemError:
        f_star = math.nan
    m0 = max_cost_norm(problem) if not math.isnan(f_star) else math.nan
    ctx = _RunContext(
        instance,
        solver_cfg,
        _certificate(instance),
        f_star,
        m0,
        instance.averaging.spectrum.lambda2,
    )
    logger.info(
        "Instance ready: m=%d n=%d |λ₂|=%.6f M0=%s", problem.m, problem.n, ctx.lambda2, m0
    )

    result = ExperimentResult(out_dir=out)
    with block_mapper(threads) as mapper:
        for variant in cfg.variants:
            result.outcomes[variant] = _run_variant(ctx, variant, mapper, out)

    result.summary = {
        "m": cfg.m,
        "n": cfg.n,
        "seed": cfg.seed,
        "p_edge": cfg.p_edge,
        "p_matrix": cfg.p_matrix.value,
        "lambda2": ctx.lambda2,
        "M0": _optional(m0),
        "f_star": _optional(f_star),
        "thresholds": [format_float(t) for t in cfg.thresholds],
        "variants": {
            v.value: _variant_summary(o, cfg.thresholds) for v, o in result.outcomes.items()
        },
        "config": cfg.model_dump(mode="json"),
    }
    write_json(out / "summary.json", result.summary, dumps)
    return result
