from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from enum import Enum
from typing import TYPE_CHECKING, Any, ClassVar, Union

import numpy as np
from scipy.special import rel_entr, xlogy

from .errors import DomainError, InputError, UnsupportedGeometryError
from .parallel import stack_blocks

if TYPE_CHECKING:
    from .graph import AveragingMatrix
    from .parallel import BlockMapper

# Interior floor for entropy iterates; ∇φ diverges on the boundary only analytically.
ENTROPY_FLOOR = 1e-300

StackedPoint = np.ndarray


class MirrorKind(str, Enum):
    SQUARED_EUCLIDEAN = "squared_euclidean"
    NEGATIVE_ENTROPY = "negative_entropy"


class SetKind(str, Enum):
    FREE_SPACE = "free_space"
    PROBABILITY_SIMPLEX = "probability_simplex"


class MirrorMap(ABC):
    kind: ClassVar[MirrorKind]
    mu: ClassVar[float] = 1.0
    p: ClassVar[float]

    @abstractmethod
    def potential(self, u: np.ndarray) -> Any: ...

    @abstractmethod
    def push(self, x: np.ndarray) -> np.ndarray:
        """∇φ, applied blockwise along the last axis."""

    @abstractmethod
    def pull(self, theta: np.ndarray) -> np.ndarray: ...

    @abstractmethod
    def divergence(self, u: np.ndarray, v: np.ndarray) -> Any:
        """B_φ(u, v) summed over the last axis."""

    def in_domain(self, v: np.ndarray) -> bool:
        return bool(np.all(np.isfinite(v)))

    def clip_to_domain(self, x: np.ndarray) -> np.ndarray:
        return x

    def sigma(self, n: int) -> float:
        """min{1, n^(2/p - 1)}."""
        return min(1.0, float(n) ** (2.0 / self.p - 1.0))

    @staticmethod
    def from_kind(kind: MirrorKind | str) -> MirrorMap:
        return _MIRROR_MAPS[MirrorKind(kind)]

    def __repr__(self) -> str:
        return f"{type(self).__name__}()"


class SquaredEuclidean(MirrorMap):
    kind = MirrorKind.SQUARED_EUCLIDEAN
    p = 2.0

    def potential(self, u: np.ndarray) -> Any:
        return 0.5 * np.sum(np.square(u), axis=-1)

    def push(self, x: np.ndarray) -> np.ndarray:
        return np.asarray(x, dtype=np.float64)

    def pull(self, theta: np.ndarray) -> np.ndarray:
        return np.asarray(theta, dtype=np.float64)

    def divergence(self, u: np.ndarray, v: np.ndarray) -> Any:
        return 0.5 * np.sum(np.square(np.subtract(u, v)), axis=-1)


class NegativeEntropy(MirrorMap):
    """φ(u) = Σ u_k ln u_k on the positive orthant; 1-strongly convex in ℓ₁ on the simplex."""

    kind = MirrorKind.NEGATIVE_ENTROPY
    p = 1.0

    def potential(self, u: np.ndarray) -> Any:
        if np.any(np.asarray(u) < 0):
            raise DomainError("negative coordinate outside the closure of the domain")
        return np.sum(xlogy(u, u), axis=-1)

    def push(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        if x.min() <= 0:
            raise DomainError("negative entropy gradient needs strictly positive coordinates")
        theta = np.log(x)
        theta += 1.0
        return theta

    def pull(self, theta: np.ndarray) -> np.ndarray:
        return np.exp(np.asarray(theta, dtype=np.float64) - 1.0)

    def divergence(self, u: np.ndarray, v: np.ndarray) -> Any:
        u = np.asarray(u, dtype=np.float64)
        v = np.asarray(v, dtype=np.float64)
        if v.min() <= 0:
            raise DomainError("second Bregman argument must lie in the open orthant")
        if u.min() < 0:
            raise DomainError("first Bregman argument must be nonnegative")
        terms = rel_entr(u, v)
        terms -= u
        terms += v
        return np.sum(terms, axis=-1)

    def in_domain(self, v: np.ndarray) -> bool:
        return bool(np.all(np.asarray(v) > 0))

    def clip_to_domain(self, x: np.ndarray) -> np.ndarray:
        return np.maximum(x, ENTROPY_FLOOR)


_MIRROR_MAPS: dict[MirrorKind, MirrorMap] = {
    MirrorKind.SQUARED_EUCLIDEAN: SquaredEuclidean(),
    MirrorKind.NEGATIVE_ENTROPY: NegativeEntropy(),
}

MirrorLike = Union[MirrorMap, MirrorKind, str]


def as_mirror(phi: MirrorLike) -> MirrorMap:
    return phi if isinstance(phi, MirrorMap) else MirrorMap.from_kind(phi)


@dataclass(frozen=True)
class FeasibleSet:
    kind: SetKind
    n: int

    def __post_init__(self) -> None:
        object.__setattr__(self, "kind", SetKind(self.kind))
        if self.n < 1:
            raise InputError(f"dimension must be positive, got {self.n}")

    @classmethod
    def free(cls, n: int) -> FeasibleSet:
        return cls(SetKind.FREE_SPACE, n)

    @classmethod
    def simplex(cls, n: int) -> FeasibleSet:
        return cls(SetKind.PROBABILITY_SIMPLEX, n)

    @property
    def is_simplex(self) -> bool:
        return self.kind is SetKind.PROBABILITY_SIMPLEX

    def contains(self, x: np.ndarray, tol: float = 1e-10) -> bool:
        x = np.asarray(x)
        if x.shape[-1] != self.n:
            return False
        if not self.is_simplex:
            return bool(np.all(np.isfinite(x)))
        return bool(np.all(x >= 0) and np.all(np.abs(x.sum(axis=-1) - 1.0) <= tol))

    def center(self) -> np.ndarray:
        if self.is_simplex:
            return np.full(self.n, 1.0 / self.n)
        return np.zeros(self.n)


def bregman_divergence(phi: MirrorLike, u: np.ndarray, v: np.ndarray) -> Any:
    """B_φ(u, v) = φ(u) - φ(v) - <∇φ(v), u - v>; per block for stacks."""
    value = as_mirror(phi).divergence(u, v)
    return float(value) if np.ndim(value) == 0 else value


def euclidean_simplex_projection(v: np.ndarray) -> np.ndarray:
    """Sort-and-threshold projection onto the probability simplex, row-wise for 2-D input."""
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[-1]
    u = -np.sort(-v, axis=-1)
    cumulative = np.cumsum(u, axis=-1) - 1.0
    index = np.arange(1, n + 1)
    rho = np.count_nonzero(u - cumulative / index > 0, axis=-1)
    theta = np.take_along_axis(cumulative, np.expand_dims(rho - 1, -1), axis=-1) / (
        np.expand_dims(rho, -1)
    )
    return np.maximum(v - theta, 0.0)


def mirror_push(phi: MirrorLike, x: np.ndarray) -> np.ndarray:
    return as_mirror(phi).push(x)


def mirror_pull(phi: MirrorLike, theta: np.ndarray) -> np.ndarray:
    return as_mirror(phi).pull(theta)


def bregman_project(phi: MirrorLike, X: FeasibleSet, z: np.ndarray) -> np.ndarray:
    phi = as_mirror(phi)
    z = np.asarray(z, dtype=np.float64)
    if not X.is_simplex:
        return z.copy()
    if phi.kind is MirrorKind.NEGATIVE_ENTROPY:
        if np.any(z <= 0):
            raise DomainError("entropy projection needs strictly positive coordinates")
        return z / np.sum(z, axis=-1, keepdims=True)
    if phi.kind is MirrorKind.SQUARED_EUCLIDEAN:
        return euclidean_simplex_projection(z)
    raise UnsupportedGeometryError(f"no Bregman projection for {phi!r} onto {X.kind.value}")


def mirror_average(
    P: AveragingMatrix,
    phi: MirrorLike,
    X: FeasibleSet,
    x: StackedPoint,
    mapper: BlockMapper | None = None,
) -> StackedPoint:
    """y_i = argmin_{y ∈ X} Σ_j P_ij B_φ(y, x_j), via averaging in the dual space.

    The dual-space average is one dense product; each block then only reads
    it, so the per-block projections may run on any ``mapper`` with identical
    results.
    """
    phi = as_mirror(phi)
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2 or x.shape[0] != P.m:
        raise InputError(f"stack shape {x.shape} does not match m={P.m}")
    averaged = P.average(phi.push(x))

    def average_block(i: int) -> np.ndarray:
        return bregman_project(phi, X, phi.pull(averaged[i]))

    return stack_blocks(mapper, average_block, P.m)


def stack_to_dict(x: StackedPoint) -> dict[str, Any]:
    x = np.asarray(x, dtype=np.float64)
    return {"m": int(x.shape[0]), "n": int(x.shape[1]), "data": x.reshape(-1).tolist()}


def stack_from_dict(data: dict[str, Any]) -> StackedPoint:
    m, n = int(data["m"]), int(data["n"])
    flat = np.array(data["data"], dtype=np.float64)
    if flat.size != m * n:
        raise InputError(f"stack data has {flat.size} entries, expected {m * n}")
    return flat.reshape(m, n)
