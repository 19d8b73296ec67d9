from __future__ import annotations

from abc import ABC, abstractmethod
from collections.abc import Sequence
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import InputError
from .geometry import FeasibleSet
from .rng import make_generator

ObjectiveFactory = Callable[[int, np.ndarray], "LocalObjective"]


class LocalObjective(ABC):
    """Convex f_i: R^n -> R known through its value and one subgradient."""

    n: int

    @abstractmethod
    def value(self, x: np.ndarray) -> float: ...

    @abstractmethod
    def subgradient(self, x: np.ndarray) -> np.ndarray: ...


class LinearObjective(LocalObjective):
    def __init__(self, c: np.ndarray) -> None:
        c = np.array(c, dtype=np.float64)
        if c.ndim != 1 or not np.all(np.isfinite(c)):
            raise InputError("linear cost must be a finite vector")
        c.setflags(write=False)
        self.c = c
        self.n = c.shape[0]

    def value(self, x: np.ndarray) -> float:
        return float(self.c @ x)

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        return self.c

    def __repr__(self) -> str:
        return f"LinearObjective(n={self.n})"


class OracleObjective(LocalObjective):
    def __init__(
        self,
        value_fn: Callable[[np.ndarray], float],
        subgradient_fn: Callable[[np.ndarray], np.ndarray],
        n: int,
    ) -> None:
        self._value = value_fn
        self._subgradient = subgradient_fn
        self.n = n

    def value(self, x: np.ndarray) -> float:
        return float(self._value(x))

    def subgradient(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(self._subgradient(x), dtype=np.float64)

    def __repr__(self) -> str:
        return f"OracleObjective(n={self.n})"


def squared_distance(vertex: int, c: np.ndarray) -> OracleObjective:
    """Oracle factory for f_i(x) = ½‖x - c_i‖²."""
    target = np.array(c, dtype=np.float64)
    return OracleObjective(
        value_fn=lambda x: 0.5 * float(np.sum(np.square(x - target))),
        subgradient_fn=lambda x: x - target,
        n=target.shape[0],
    )


@dataclass(frozen=True)
class ProblemInstance:
    """minimize Σ f_i(x_i) over X^m subject to consensus through P."""

    m: int
    n: int
    objectives: tuple[LocalObjective, ...]
    feasible: FeasibleSet
    parameters: Optional[np.ndarray] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if len(self.objectives) != self.m:
            raise InputError(f"expected {self.m} objectives, got {len(self.objectives)}")
        if self.feasible.n != self.n:
            raise InputError(f"feasible set has dimension {self.feasible.n}, not {self.n}")
        for i, f in enumerate(self.objectives):
            if f.n != self.n:
                raise InputError(f"objective {i} has dimension {f.n}, not {self.n}")

    @classmethod
    def from_costs(
        cls,
        costs: np.ndarray,
        feasible: FeasibleSet | None = None,
        factory: ObjectiveFactory | None = None,
    ) -> ProblemInstance:
        """One objective per cost row: linear, or built by ``factory(i, c_i)``."""
        costs = np.array(costs, dtype=np.float64)
        if costs.ndim != 2:
            raise InputError(f"costs must be an (m, n) array, got shape {costs.shape}")
        m, n = costs.shape
        costs.setflags(write=False)
        if factory is None:
            objectives: Sequence[LocalObjective] = [LinearObjective(c) for c in costs]
        else:
            objectives = [factory(i, c) for i, c in enumerate(costs)]
        return cls(m, n, tuple(objectives), feasible or FeasibleSet.simplex(n), costs)

    @property
    def is_linear(self) -> bool:
        return all(isinstance(f, LinearObjective) for f in self.objectives)

    @property
    def costs(self) -> np.ndarray:
        if self.parameters is not None:
            return self.parameters
        if not self.is_linear:
            raise InputError("cost vectors are only defined for linear objectives")
        return np.stack([f.c for f in self.objectives])  # type: ignore[attr-defined]

    def total_value(self, x: np.ndarray) -> float:
        """Σ f_i(x_i) for a stacked point."""
        if self.is_linear:
            return float(np.vdot(self.costs, x))
        return float(sum(f.value(xi) for f, xi in zip(self.objectives, x)))


def _sample_point(feasible: FeasibleSet, generator, size: int) -> np.ndarray:
    if feasible.is_simplex:
        weights = -np.log1p(-generator.uniform(size * feasible.n)).reshape(size, -1)
        return weights / weights.sum(axis=1, keepdims=True)
    return generator.standard_normal(size * feasible.n).reshape(size, -1)


def check_subgradient(
    objective: LocalObjective,
    feasible: FeasibleSet,
    samples: int = 100,
    seed: int = 0,
) -> float:
    """Smallest f(v) - f(u) - <g(u), v - u> over sampled pairs; >= -1e-9 for a valid oracle."""
    generator = make_generator(seed)
    us = _sample_point(feasible, generator, samples)
    vs = _sample_point(feasible, generator, samples)
    return float(
        min(
            objective.value(v) - objective.value(u) - objective.subgradient(u) @ (v - u)
            for u, v in zip(us, vs)
        )
    )
