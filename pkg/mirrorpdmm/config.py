from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Any, Callable, List, Literal, Optional, Union

import numpy as np
from pydantic import (
    BaseModel,
    ConfigDict,
    Field,
    FilePath,
    PositiveFloat,
    field_validator,
)

from .errors import ParameterError
from .geometry import MirrorKind, MirrorMap, SetKind
from .imports import ImportedType
from .types import FloatVector

logger = logging.getLogger(__name__)


class Variant(str, Enum):
    EUCLID = "euclid"
    BREGMAN = "bregman"


class PMatrixKind(str, Enum):
    LAPLACIAN = "laplacian"
    OPTIMIZED = "optimized"


def default_step_size(phi: MirrorMap, n: int, rho: float, gamma: float) -> float:
    """Largest admissible dual step, τ = ρ(μσ - γ)."""
    bound = phi.mu * phi.sigma(n)
    if not 0.0 < gamma < bound:
        raise ParameterError(f"gamma must lie in (0, μσ) = (0, {bound}), got {gamma}")
    return rho * (bound - gamma)


@dataclass(frozen=True)
class StepParams:
    """Parameters of one run after variant, dimension and defaults are applied."""

    variant: Variant
    rho: float
    tau: float
    gamma: float
    deltas: np.ndarray
    phi: MirrorMap
    prox: MirrorMap
    inner_iters: int
    inner_tol: float
    n: int

    @property
    def delta_max(self) -> float:
        return float(self.deltas.max()) if self.deltas.size else 0.0

    @property
    def in_step_regime(self) -> bool:
        """0 < γ < μσ and τ <= ρ(μσ - γ), where V descends by at least R each step."""
        bound = self.phi.mu * self.phi.sigma(self.n)
        largest = self.rho * (bound - self.gamma)
        return 0.0 < self.gamma < bound and self.tau <= largest * (1.0 + 1e-12)


class SolverConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    rho: PositiveFloat = 1.0
    tau: Optional[PositiveFloat] = None
    delta: Union[float, FloatVector] = 0.0
    gamma: PositiveFloat = 0.25
    mirror: MirrorKind = MirrorKind.NEGATIVE_ENTROPY
    prox: Optional[MirrorKind] = None
    max_iters: int = Field(1000, ge=0)
    stop_tol: float = Field(0.0, ge=0)
    seed: int = 0
    strict: bool = True
    workers: int = Field(1, ge=1)
    inner_iters: int = Field(500, ge=1)
    inner_tol: PositiveFloat = 1e-10

    @field_validator("delta")
    @classmethod
    def _nonnegative_delta(cls, value: Any) -> Any:
        if np.any(np.asarray(value) < 0):
            raise ValueError("proximal weights must be nonnegative")
        return value

    @property
    def mirror_map(self) -> MirrorMap:
        return MirrorMap.from_kind(self.mirror)

    @property
    def prox_map(self) -> MirrorMap:
        return MirrorMap.from_kind(self.prox or self.mirror)

    def deltas(self, m: int) -> np.ndarray:
        delta = np.asarray(self.delta, dtype=np.float64)
        if delta.ndim == 0:
            return np.full(m, float(delta))
        if delta.shape != (m,):
            raise ParameterError(f"delta has {delta.size} entries for {m} vertices")
        return delta.copy()

    def resolve(
        self, variant: Variant | str, m: int, n: int
    ) -> StepParams:
        """Bind the config to one variant and problem size.

        The euclid variant is Bregman PDMM with φ = ½‖·‖², τ = ρ and δ = 0.
        The step condition τ <= ρ(μσ - γ) is enforced for the bregman variant only.
        """
        variant = Variant(variant)
        if variant is Variant.EUCLID:
            euclid = MirrorMap.from_kind(MirrorKind.SQUARED_EUCLIDEAN)
            return StepParams(
                variant=variant,
                rho=self.rho,
                tau=self.rho,
                gamma=self.gamma,
                deltas=np.zeros(m),
                phi=euclid,
                prox=euclid,
                inner_iters=self.inner_iters,
                inner_tol=self.inner_tol,
                n=n,
            )
        phi = self.mirror_map
        bound = phi.mu * phi.sigma(n)
        tau = self.tau
        if self.strict:
            largest = default_step_size(phi, n, self.rho, self.gamma)
            if tau is None:
                tau = largest
            elif tau > largest * (1.0 + 1e-12):
                raise ParameterError(
                    f"tau={tau} exceeds ρ(μσ - γ) = {largest}; "
                    "disable strict mode to run anyway"
                )
        else:
            if tau is None:
                tau = default_step_size(phi, n, self.rho, self.gamma)
            elif not (self.gamma < bound and tau <= self.rho * (bound - self.gamma)):
                logger.warning(
                    "Running outside the proven step regime: tau=%s gamma=%s μσ=%s",
                    tau,
                    self.gamma,
                    bound,
                )
        return StepParams(
            variant=variant,
            rho=self.rho,
            tau=tau,
            gamma=self.gamma,
            deltas=self.deltas(m),
            phi=phi,
            prox=self.prox_map,
            inner_iters=self.inner_iters,
            inner_tol=self.inner_tol,
            n=n,
        )


class ExperimentConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    m: int = Field(20, ge=2)
    n: int = Field(1000, ge=1)
    p_edge: float = Field(0.2, gt=0, le=1)
    seed: int = Field(0, ge=0)
    cost_distribution: Literal["standard_normal"] = "standard_normal"
    feasible: SetKind = SetKind.PROBABILITY_SIMPLEX
    solver: SolverConfig = Field(default_factory=SolverConfig)
    variants: List[Variant] = Field(
        default_factory=lambda: [Variant.BREGMAN, Variant.EUCLID], min_length=1
    )
    p_matrix: PMatrixKind = PMatrixKind.LAPLACIAN
    optimize_iters: int = Field(500, ge=1)
    T_max: Optional[int] = Field(None, ge=0)
    thresholds: List[PositiveFloat] = Field(default_factory=lambda: [1e-2, 1e-4, 1e-6])
    graph_path: Optional[FilePath] = None
    oracle: Optional[ImportedType[Callable[..., Any]]] = None
    out_dir: Optional[Path] = None

    @property
    def max_iters(self) -> int:
        return self.solver.max_iters if self.T_max is None else self.T_max

    def solver_config(self) -> SolverConfig:
        """Solver settings for a run; an unset τ becomes min(ρ/2, ρ(μσ - γ))."""
        update: dict[str, Any] = {"max_iters": self.max_iters}
        solver = self.solver
        phi = solver.mirror_map
        bound = phi.mu * phi.sigma(self.n)
        if solver.tau is None and solver.gamma < bound:
            update["tau"] = min(solver.rho / 2, solver.rho * (bound - solver.gamma))
        return solver.model_copy(update=update)
