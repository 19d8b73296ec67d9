from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Optional, Union

import numpy as np
from scipy.special import softmax

from .config import SolverConfig, StepParams, Variant, default_step_size
from .diagnostics import (
    ErgodicAccumulator,
    SaddleCertificate,
    consensus_from_average,
    lyapunov_V,
    reference_solution,
    residual_R,
)
from .errors import (
    DomainError,
    InputError,
    ProxSolverError,
    SolverError,
    UnboundedProblemError,
)
from .geometry import (
    FeasibleSet,
    MirrorKind,
    MirrorMap,
    bregman_project,
    euclidean_simplex_projection,
    mirror_average,
)
from .graph import AveragingMatrix
from .parallel import BlockMapper, stack_blocks
from .problem import LinearObjective, LocalObjective, ProblemInstance
from .trace import DiagnosticsRecord, RunTrace

logger = logging.getLogger(__name__)

__all__ = [
    "IterateState",
    "bregman_pdmm_step",
    "default_step_size",
    "dual_residual_vector",
    "dual_residuals",
    "initial_state",
    "pdmm_step",
    "run",
    "solve_local_prox",
]

Params = Union[SolverConfig, StepParams]


@dataclass(frozen=True, eq=False)
class IterateState:
    """Primal x, its mirror average y, duals ν and the averages Px, at iteration t."""

    x: np.ndarray
    y: np.ndarray
    nu: np.ndarray
    px: np.ndarray
    t: int = 0

    @cached_property
    def consensus(self) -> float:
        """½‖x - Px‖²."""
        return consensus_from_average(self.x, self.px)


def _resolve(params: Params, variant: Variant | str, problem: ProblemInstance) -> StepParams:
    if isinstance(params, StepParams):
        return params
    return params.resolve(variant, problem.m, problem.n)


def dual_residual_vector(nu: np.ndarray, P: AveragingMatrix, i: int) -> np.ndarray:
    """Δν_i = ν_i - Σ_j P_ij ν_j."""
    return nu[i] - P.entries[i] @ nu


def dual_residuals(nu: np.ndarray, P: AveragingMatrix) -> np.ndarray:
    averaged = P.average(nu)
    return np.subtract(nu, averaged, out=averaged)


def initial_state(
    problem: ProblemInstance,
    P: AveragingMatrix,
    phi: MirrorMap,
    mapper: BlockMapper | None = None,
) -> IterateState:
    if P.m != problem.m:
        raise InputError(f"averaging matrix is {P.m}x{P.m}, problem has m={problem.m}")
    if problem.feasible.is_simplex or phi.kind is not MirrorKind.NEGATIVE_ENTROPY:
        block = problem.feasible.center()
    else:
        block = np.ones(problem.n)
    x = np.tile(block, (problem.m, 1))
    return IterateState(
        x=x,
        y=mirror_average(P, phi, problem.feasible, x, mapper),
        nu=np.zeros_like(x),
        px=P.average(x),
        t=0,
    )


def _project(feasible: FeasibleSet, z: np.ndarray) -> np.ndarray:
    return euclidean_simplex_projection(z) if feasible.is_simplex else z


def _entropy_prox(logits: np.ndarray, feasible: FeasibleSet, phi: MirrorMap) -> np.ndarray:
    x = softmax(logits) if feasible.is_simplex else np.exp(logits)
    return phi.clip_to_domain(x)


def _prox_value(
    objective: LocalObjective,
    x: np.ndarray,
    dnu: np.ndarray,
    y: np.ndarray,
    x_prev: np.ndarray,
    params: StepParams,
    delta: float,
) -> float:
    value = objective.value(x) + float(dnu @ x) + params.rho * params.phi.divergence(x, y)
    if delta > 0:
        value += delta * params.prox.divergence(x, params.prox.clip_to_domain(x_prev))
    return float(value)


def _numeric_prox(
    objective: LocalObjective,
    dnu: np.ndarray,
    y: np.ndarray,
    x_prev: np.ndarray,
    feasible: FeasibleSet,
    params: StepParams,
    delta: float,
) -> np.ndarray:
    """Mirror subgradient steps 1/((ρ+δ)k) in the φ geometry, started at y."""
    phi, prox, rho = params.phi, params.prox, params.rho
    push_y = phi.push(y)
    x_prev = prox.clip_to_domain(x_prev)
    push_prev = prox.push(x_prev) if delta > 0 else None
    x = y.copy()
    best, best_value = x, _prox_value(objective, x, dnu, y, x_prev, params, delta)
    for k in range(1, params.inner_iters + 1):
        push_x = phi.push(x)
        g = objective.subgradient(x) + dnu + rho * (push_x - push_y)
        if push_prev is not None:
            g = g + delta * (prox.push(prox.clip_to_domain(x)) - push_prev)
        step = 1.0 / ((rho + delta) * k)
        nxt = phi.clip_to_domain(bregman_project(phi, feasible, phi.pull(push_x - step * g)))
        if not np.all(np.isfinite(nxt)):
            raise ProxSolverError(f"non-finite local iterate at inner step {k}")
        value = _prox_value(objective, nxt, dnu, y, x_prev, params, delta)
        if value < best_value:
            best, best_value = nxt, value
        if np.max(np.abs(nxt - x)) <= params.inner_tol:
            return best
        x = nxt
    logger.warning(
        "Local solver hit the %d-iteration cap; returning the best iterate",
        params.inner_iters,
    )
    return best


def solve_local_prox(
    objective: LocalObjective,
    dnu: np.ndarray,
    y: np.ndarray,
    x_prev: np.ndarray,
    params: StepParams,
    feasible: FeasibleSet,
    delta: float = 0.0,
) -> np.ndarray:
    """argmin_x f(x) + <Δν, x> + ρ B_φ(x, y) + δ B_ψ(x, x_prev) over X.

    Linear objectives with ψ = φ (or δ = 0) use closed forms; everything else
    goes through the numeric fallback.
    """
    phi, rho = params.phi, params.rho
    closed = isinstance(objective, LinearObjective) and (
        delta == 0.0 or params.prox.kind is phi.kind
    )
    if not closed:
        return _numeric_prox(objective, dnu, y, x_prev, feasible, params, delta)

    s = objective.c + dnu  # type: ignore[attr-defined]
    if phi.kind is MirrorKind.SQUARED_EUCLIDEAN:
        if delta == 0.0:
            return _project(feasible, y - s / rho)
        anchor = (rho * y + delta * x_prev) / (rho + delta)
        return _project(feasible, anchor - s / (rho + delta))
    if phi.kind is MirrorKind.NEGATIVE_ENTROPY:
        if delta == 0.0:
            return _entropy_prox(np.log(y) - s / rho, feasible, phi)
        logits = (rho * np.log(y) + delta * np.log(x_prev) - s) / (rho + delta)
        return _entropy_prox(logits, feasible, phi)
    return _numeric_prox(objective, dnu, y, x_prev, feasible, params, delta)


def _advance(
    state: IterateState,
    x_next: np.ndarray,
    P: AveragingMatrix,
    phi: MirrorMap,
    feasible: FeasibleSet,
    step: float,
    mapper: BlockMapper | None,
) -> IterateState:
    px_next = P.average(x_next)
    nu = x_next - px_next
    nu *= step
    nu += state.nu
    return IterateState(
        x=x_next,
        y=mirror_average(P, phi, feasible, x_next, mapper),
        nu=nu,
        px=px_next,
        t=state.t + 1,
    )


def pdmm_step(
    state: IterateState,
    problem: ProblemInstance,
    P: AveragingMatrix,
    cfg: Params,
    mapper: BlockMapper | None = None,
) -> IterateState:
    """One Euclidean PDMM iteration.

    x_i⁺ = Π_X(x̄_i - (c_i + Δν_i)/ρ), then ν⁺ = ν + ρ(I - P)x⁺.
    """
    params = _resolve(cfg, Variant.EUCLID, problem)
    feasible, rho = problem.feasible, params.rho
    dnu = dual_residuals(state.nu, P)

    def update(i: int) -> np.ndarray:
        objective = problem.objectives[i]
        if isinstance(objective, LinearObjective):
            return _project(feasible, state.y[i] - (objective.c + dnu[i]) / rho)
        return _numeric_prox(objective, dnu[i], state.y[i], state.x[i], feasible, params, 0.0)

    x_next = stack_blocks(mapper, update, problem.m)
    return _advance(state, x_next, P, params.phi, feasible, rho, mapper)


def bregman_pdmm_step(
    state: IterateState,
    problem: ProblemInstance,
    P: AveragingMatrix,
    cfg: Params,
    mapper: BlockMapper | None = None,
) -> IterateState:
    params = _resolve(cfg, Variant.BREGMAN, problem)
    feasible = problem.feasible
    dnu = dual_residuals(state.nu, P)

    def update(i: int) -> np.ndarray:
        return solve_local_prox(
            problem.objectives[i],
            dnu[i],
            state.y[i],
            state.x[i],
            params,
            feasible,
            float(params.deltas[i]),
        )

    x_next = stack_blocks(mapper, update, problem.m)
    return _advance(state, x_next, P, params.phi, feasible, params.tau, mapper)


def _reference_value(problem: ProblemInstance) -> float:
    try:
        f_star, _ = reference_solution(problem)
    except UnboundedProblemError:
        logger.warning("Problem is unbounded below; objective gaps are reported as NaN")
        return math.nan
    return f_star


def _ignore(state: IterateState) -> None:
    pass


def _record(
    problem: ProblemInstance,
    state: IterateState,
    params: StepParams,
    certificate: SaddleCertificate | None,
    f_star: float,
    objective_x: np.ndarray,
    ergodic_consensus: float,
    start: int,
    R: float | None = None,
) -> DiagnosticsRecord:
    return DiagnosticsRecord(
        t=state.t,
        objective_gap=problem.total_value(objective_x) - f_star,
        consensus_residual=state.consensus,
        R=R,
        V=None if certificate is None else lyapunov_V(state, certificate, params),
        wall_nanos=time.perf_counter_ns() - start,
        ergodic_consensus_residual=ergodic_consensus,
    )


def run(
    problem: ProblemInstance,
    P: AveragingMatrix,
    cfg: SolverConfig,
    variant: Variant | str = Variant.BREGMAN,
    certificate: SaddleCertificate | None = None,
    f_star: float | None = None,
    mapper: BlockMapper | None = None,
    callback: Optional[Callable[[IterateState], None]] = None,
) -> RunTrace:
    """Iterate one variant and record diagnostics after every step.

    A :class:`SolverError` raised mid-run carries the records so far on
    ``trace``; a :class:`DomainError` raised mid-run is turned into one.
    """
    variant = Variant(variant)
    params = cfg.resolve(variant, problem.m, problem.n)
    step = pdmm_step if variant is Variant.EUCLID else bregman_pdmm_step
    if f_star is None:
        f_star = _reference_value(problem)

    trace = RunTrace(variant=variant.value)
    start = time.perf_counter_ns()
    notify = callback or _ignore
    state = initial_state(problem, P, params.phi, mapper)
    notify(state)
    trace.append(
        _record(problem, state, params, certificate, f_star, state.x, state.consensus, start)
    )
    logger.info(
        "Starting %s run: m=%d n=%d rho=%s tau=%s max_iters=%d",
        variant.value,
        problem.m,
        problem.n,
        params.rho,
        params.tau,
        cfg.max_iters,
    )

    ergodic = ErgodicAccumulator()
    trace.stop_reason = "max_iters"
    try:
        for _ in range(cfg.max_iters):
            nxt = step(state, problem, P, params, mapper)
            R = residual_R(state, nxt, params)
            mean = ergodic.add(nxt.x, nxt.px)
            trace.append(
                _record(
                    problem,
                    nxt,
                    params,
                    certificate,
                    f_star,
                    mean,
                    ergodic.consensus_residual,
                    start,
                    R,
                )
            )
            state = nxt
            notify(state)
            if not math.isfinite(R):
                raise SolverError(f"residual became non-finite at iteration {state.t}")
            if R < cfg.stop_tol:
                trace.stop_reason = "stop_tol"
                break
    except DomainError as e:
        trace.stop_reason = "error"
        error = SolverError(f"iterate left the domain after iteration {state.t}: {e}")
        error.trace = trace
        raise error from e
    except SolverError as e:
        trace.stop_reason = "error"
        e.trace = trace
        raise
    logger.info(
        "Finished %s run after %d iterations (%s)",
        variant.value,
        trace.iterations,
        trace.stop_reason,
    )
    return trace
