from __future__ import annotations

import logging
import math
from collections.abc import Sequence
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional

import numpy as np

from .config import StepParams, Variant
from .errors import CertificateError, InputError, UnboundedProblemError
from .geometry import MirrorKind, euclidean_simplex_projection
from .graph import AveragingMatrix
from .problem import ProblemInstance

if TYPE_CHECKING:
    from .solver import IterateState
    from .trace import DiagnosticsRecord, RunTrace

logger = logging.getLogger(__name__)

PINV_TOL = 1e-10
KKT_TOL = 1e-8
CENTRAL_ITERS = 10_000


def consensus_from_average(x: np.ndarray, px: np.ndarray) -> float:
    diff = x - px
    return 0.5 * float(np.vdot(diff, diff))


def consensus_residual(x: np.ndarray, P: AveragingMatrix) -> float:
    """½‖((I - P) ⊗ I)x‖²."""
    return consensus_from_average(x, P.average(x))


def _weighted_divergence(params: StepParams, u: np.ndarray, v: np.ndarray) -> float:
    """Σ_i (δ_i / ρ) B_{φ_i}(u_i, v_i), skipping zero weights."""
    active = params.deltas > 0
    if not np.any(active):
        return 0.0
    divergences = params.prox.divergence(u[active], params.prox.clip_to_domain(v[active]))
    return float(np.sum(params.deltas[active] / params.rho * divergences))


def residual_R(state: IterateState, nxt: IterateState, params: StepParams) -> float:
    """Optimality residual between consecutive iterates; zero exactly at a fixed point."""
    consensus = params.gamma * nxt.consensus
    bregman = float(np.sum(params.phi.divergence(nxt.x, state.y)))
    return consensus + bregman + _weighted_divergence(params, nxt.x, state.x)


def lyapunov_V(
    state: IterateState, cert: SaddleCertificate, params: StepParams
) -> float:
    if cert.x_star.shape != state.x.shape:
        raise InputError(
            f"certificate shape {cert.x_star.shape} does not match state {state.x.shape}"
        )
    diff = cert.nu_star - state.nu
    dual = float(np.vdot(diff, diff)) / (2.0 * params.tau * params.rho)
    primal = float(np.sum(params.phi.divergence(cert.x_star, state.y)))
    return dual + primal + _weighted_divergence(params, cert.x_star, state.x)


def ergodic_average(iterates: Sequence[np.ndarray], T: int) -> np.ndarray:
    """(1/T) Σ_{t=1..T} x⁽ᵗ⁾, with ``iterates[0]`` holding x⁽¹⁾."""
    if not 1 <= T <= len(iterates):
        raise InputError(f"need 1 <= T <= {len(iterates)}, got {T}")
    return np.mean(np.stack(iterates[:T]), axis=0)


class ErgodicAccumulator:
    """Running means of x⁽ᵗ⁾ and Px⁽ᵗ⁾ over t = 1..T."""

    def __init__(self) -> None:
        self.count = 0
        self.mean: Optional[np.ndarray] = None
        self.mean_px: Optional[np.ndarray] = None

    def add(self, x: np.ndarray, px: np.ndarray) -> np.ndarray:
        self.count += 1
        if self.mean is None or self.mean_px is None:
            self.mean, self.mean_px = x.copy(), px.copy()
        else:
            for mean, value in ((self.mean, x), (self.mean_px, px)):
                step = value - mean
                step /= self.count
                mean += step
        return self.mean

    @property
    def consensus_residual(self) -> float:
        if self.mean is None or self.mean_px is None:
            return math.nan
        return consensus_from_average(self.mean, self.mean_px)


def _central_solve(problem: ProblemInstance) -> tuple[float, np.ndarray]:
    """Projected subgradient on Σ f_i with steps 1/(m k); best iterate wins."""
    feasible = problem.feasible
    u = feasible.center()
    best_value, best = math.inf, u
    for k in range(1, CENTRAL_ITERS + 1):
        value = float(sum(f.value(u) for f in problem.objectives))
        if value < best_value:
            best_value, best = value, u
        g = np.sum([f.subgradient(u) for f in problem.objectives], axis=0)
        u = u - g / (problem.m * k)
        if feasible.is_simplex:
            u = euclidean_simplex_projection(u)
    value = float(sum(f.value(u) for f in problem.objectives))
    if value < best_value:
        best_value, best = value, u
    return best_value, best


def reference_solution(problem: ProblemInstance) -> tuple[float, np.ndarray]:
    if not problem.is_linear:
        return _central_solve(problem)
    total = problem.costs.sum(axis=0)
    if problem.feasible.is_simplex:
        k = int(np.argmin(total))
        return float(total[k]), np.eye(problem.n)[k]
    if np.all(np.abs(total) <= 1e-12):
        return 0.0, np.zeros(problem.n)
    raise UnboundedProblemError("linear objectives over free space with nonzero total cost")


@dataclass(frozen=True)
class KKTViolation:
    consensus: float
    stationarity: float
    normal_cone: float

    @property
    def max(self) -> float:
        return max(self.consensus, self.stationarity, self.normal_cone)


@dataclass(frozen=True)
class SaddleCertificate:
    x_star: np.ndarray
    nu_star: np.ndarray
    g: np.ndarray
    residual_kkt: float

    @property
    def block(self) -> np.ndarray:
        return self.x_star[0]


def kkt_violation(
    problem: ProblemInstance, P: AveragingMatrix, cert: SaddleCertificate
) -> KKTViolation:
    """Sup-norm violations of consensus, linear stationarity and g_i ∈ N_X(x⋆_i)."""
    a = P.entries
    x, nu, g = cert.x_star, cert.nu_star, cert.g
    consensus = float(np.max(np.abs(x - a @ x)))
    stationarity = float(np.max(np.abs(-nu + a @ nu - g - problem.costs)))
    if problem.feasible.is_simplex:
        # <g, x⋆ - e_l> >= 0 for every vertex e_l
        inner = np.sum(g * x, axis=1)
        normal_cone = float(max(0.0, np.max(g.max(axis=1) - inner)))
    else:
        normal_cone = float(np.max(np.abs(g)))
    return KKTViolation(consensus, stationarity, normal_cone)


def certificate_search(
    problem: ProblemInstance, P: AveragingMatrix, x_star: np.ndarray | None = None
) -> SaddleCertificate:
    """Saddle point (x⋆, ν⋆) for linear objectives over the simplex.

    Takes g_i = -(1/m) Σ_j c_j and solves (P - I)ν = c + g by a pseudoinverse
    built from the eigen-decomposition of P - I.
    """
    if not (problem.is_linear and problem.feasible.is_simplex):
        raise InputError("certificates need linear objectives over the simplex")
    m, n = problem.m, problem.n
    if x_star is None:
        _, block = reference_solution(problem)
        x_star = np.tile(block, (m, 1))
    costs = problem.costs
    g = np.tile(-costs.sum(axis=0) / m, (m, 1))

    values, vectors = np.linalg.eigh(P.entries - np.eye(m))
    inverse = np.zeros_like(values)
    keep = np.abs(values) >= PINV_TOL
    inverse[keep] = 1.0 / values[keep]
    nu_star = vectors @ (inverse[:, None] * (vectors.T @ (costs + g)))

    cert = SaddleCertificate(np.asarray(x_star, dtype=np.float64), nu_star, g, 0.0)
    violation = kkt_violation(problem, P, cert).max
    if violation > KKT_TOL:
        raise CertificateError(f"KKT residual {violation:.3e} above {KKT_TOL}")
    return SaddleCertificate(cert.x_star, nu_star, g, violation)


def max_cost_norm(problem: ProblemInstance, x_star: np.ndarray | None = None) -> float:
    """M₀ = max_i ‖g_i‖² with g_i = c_i, or the oracle subgradient at x⋆."""
    if problem.is_linear:
        return float(np.max(np.sum(np.square(problem.costs), axis=1)))
    if x_star is None:
        _, x_star = reference_solution(problem)
    return float(max(np.sum(np.square(f.subgradient(x_star))) for f in problem.objectives))


@dataclass(frozen=True)
class RateBounds:
    """Right-hand sides of the ergodic rate bounds evaluated at ``T``.

    A bound is ``None`` where its hypotheses do not hold for the run.
    """

    T: int
    saddle_objective: Optional[float]
    saddle_consensus: Optional[float]
    uniform_objective: Optional[float]
    uniform_consensus: Optional[float]

    def at(self, T: int) -> RateBounds:
        scale = self.T / T

        def scaled(value: Optional[float]) -> Optional[float]:
            return None if value is None else value * scale

        return RateBounds(
            T,
            scaled(self.saddle_objective),
            scaled(self.saddle_consensus),
            scaled(self.uniform_objective),
            scaled(self.uniform_consensus),
        )


def uniform_rate_setting(
    params: StepParams, initial: IterateState, on_simplex: bool = True
) -> bool:
    """Entropy PDMM on the simplex from x = 1/n and ν = 0 with γ = 1/4 and τ = ρ/2."""
    entropy = MirrorKind.NEGATIVE_ENTROPY
    if not on_simplex or params.variant is not Variant.BREGMAN or params.phi.kind is not entropy:
        return False
    if params.prox.kind is not entropy and np.any(params.deltas > 0):
        return False
    n = initial.x.shape[1]
    return (
        math.isclose(params.gamma, 0.25)
        and math.isclose(params.tau, params.rho / 2)
        and not np.any(initial.nu)
        and np.allclose(initial.x, 1.0 / n)
    )


def rate_bounds(
    initial: IterateState,
    params: StepParams,
    T: int,
    m: int,
    n: int,
    M0: float,
    lambda2: float,
    cert: SaddleCertificate | None = None,
    on_simplex: bool = True,
) -> RateBounds:
    if T < 1:
        raise InputError(f"T must be >= 1, got {T}")
    rho, delta_max = params.rho, params.delta_max
    saddle_objective = saddle_consensus = None
    if cert is not None and params.in_step_regime:
        spread = rho * float(np.sum(params.phi.divergence(cert.x_star, initial.y)))
        spread += rho * _weighted_divergence(params, cert.x_star, initial.x)
        saddle_objective = spread / T
        saddle_consensus = lyapunov_V(initial, cert, params) / (params.gamma * T)
    uniform_objective = uniform_consensus = None
    if uniform_rate_setting(params, initial, on_simplex):
        log_n = math.log(n)
        uniform_objective = m * (rho + delta_max) * log_n / T
        gap = 1.0 - lambda2
        mixing = 4.0 * m * M0 / (rho**2 * gap**2 * T) if gap > 0 else math.inf
        uniform_consensus = mixing + 4.0 * m * (rho + delta_max) * log_n / (rho * T)
    return RateBounds(T, saddle_objective, saddle_consensus, uniform_objective, uniform_consensus)


@dataclass(frozen=True)
class TraceCertification:
    worst_descent_slack: Optional[float]
    v_nonincreasing: Optional[bool]
    residual_sum: float
    v0: Optional[float]
    saddle_objective_ratio: Optional[float]
    saddle_consensus_ratio: Optional[float]
    uniform_objective_ratio: Optional[float]
    uniform_consensus_ratio: Optional[float]
    descent_applies: bool = True

    @property
    def ratios(self) -> list[float]:
        values = (
            self.saddle_objective_ratio,
            self.saddle_consensus_ratio,
            self.uniform_objective_ratio,
            self.uniform_consensus_ratio,
        )
        return [r for r in values if r is not None and not math.isnan(r)]

    def holds(self, tol: float = 1e-8) -> Optional[bool]:
        """``None`` when no bound and no descent check applies to the run."""
        ratios = self.ratios
        descent = self.descent_applies and self.v0 is not None
        if not ratios and not descent:
            return None
        if any(r > 1.0 + tol for r in ratios):
            return False
        if not descent:
            return True
        if self.worst_descent_slack is not None and self.worst_descent_slack < -tol:
            return False
        return self.residual_sum <= self.v0 + 1e-6


def _worst_ratio(values: Sequence[float], bounds: Sequence[Optional[float]]) -> Optional[float]:
    if all(bound is None for bound in bounds):
        return None
    worst = -math.inf
    for value, bound in zip(values, bounds):
        if bound is None or math.isnan(value):
            continue
        if bound == 0.0:
            ratio = 0.0 if value <= 0.0 else math.inf
        else:
            ratio = value / bound
        worst = max(worst, ratio)
    return worst if worst > -math.inf else math.nan


def _descent_check(records: Sequence[DiagnosticsRecord]) -> tuple[float, bool]:
    worst_slack, nonincreasing = math.inf, True
    for before, after in zip(records, records[1:]):
        if before.V is None or after.V is None or after.R is None:
            continue
        slack = (before.V - after.V - after.R) / max(1.0, abs(before.V))
        worst_slack = min(worst_slack, slack)
        nonincreasing = nonincreasing and after.V <= before.V + 1e-12 * max(1.0, before.V)
    return worst_slack, nonincreasing


def certify_trace(
    trace: RunTrace, bounds: RateBounds, descent: bool = True
) -> TraceCertification:
    """Check the ergodic bounds at every prefix of a trace, and descent with Σ R ≤ V(0).

    Pass ``descent=False`` for runs outside the step regime; descent is then not checked.
    """
    records = trace.records
    later = records[1:]
    residual_sum = float(sum(r.R for r in later if r.R is not None))
    v0 = records[0].V if records else None
    worst_slack: Optional[float] = None
    nonincreasing: Optional[bool] = None
    if descent and v0 is not None and later:
        worst_slack, nonincreasing = _descent_check(records)

    prefixes = [bounds.at(r.t) for r in later]
    gaps = [r.objective_gap for r in later]
    ergodic = [
        math.nan if r.ergodic_consensus_residual is None else r.ergodic_consensus_residual
        for r in later
    ]
    return TraceCertification(
        worst_descent_slack=worst_slack,
        v_nonincreasing=nonincreasing,
        residual_sum=residual_sum,
        v0=v0,
        saddle_objective_ratio=_worst_ratio(gaps, [b.saddle_objective for b in prefixes]),
        saddle_consensus_ratio=_worst_ratio(ergodic, [b.saddle_consensus for b in prefixes]),
        uniform_objective_ratio=_worst_ratio(gaps, [b.uniform_objective for b in prefixes]),
        uniform_consensus_ratio=_worst_ratio(ergodic, [b.uniform_consensus for b in prefixes]),
        descent_applies=descent,
    )
