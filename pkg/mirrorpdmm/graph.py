from __future__ import annotations

import logging
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from functools import cached_property
from itertools import combinations
from typing import Any

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import EigenSolverError, GraphConnectivityError, InputError
from .rng import MASK64, Xoshiro256StarStar

logger = logging.getLogger(__name__)

MAX_REDRAWS = 1000
STOCHASTIC_TOL = 1e-12
PSD_TOL = 1e-10
JACOBI_TOL = 1e-12
JACOBI_MAX_SWEEPS = 100


def _count_components(m: int, rows: Sequence[int], cols: Sequence[int]) -> int:
    adjacency = csr_matrix(
        (np.ones(len(rows)), (np.asarray(rows), np.asarray(cols))), shape=(m, m)
    )
    n_components, _ = connected_components(adjacency, directed=False)
    return int(n_components)


@dataclass(frozen=True)
class Graph:
    """Undirected simple graph on vertices ``0..m-1``; edges stored as ``(i, j)``, i < j."""

    m: int
    edges: frozenset[tuple[int, int]] = field(default_factory=frozenset)

    def __post_init__(self) -> None:
        if self.m < 1:
            raise InputError(f"vertex count must be positive, got {self.m}")
        normalized = set()
        for i, j in self.edges:
            i, j = int(i), int(j)
            if i == j:
                raise InputError(f"self-loop at vertex {i}")
            if not (0 <= i < self.m and 0 <= j < self.m):
                raise InputError(f"edge ({i}, {j}) out of range for m={self.m}")
            normalized.add((min(i, j), max(i, j)))
        object.__setattr__(self, "edges", frozenset(normalized))

    @classmethod
    def from_edges(cls, m: int, edges: Iterable[Sequence[int]]) -> Graph:
        return cls(m, frozenset((int(e[0]), int(e[1])) for e in edges))

    @classmethod
    def complete(cls, m: int) -> Graph:
        return cls(m, frozenset(combinations(range(m), 2)))

    @cached_property
    def adjacency(self) -> tuple[tuple[int, ...], ...]:
        neighbors: list[list[int]] = [[] for _ in range(self.m)]
        for i, j in self.edges:
            neighbors[i].append(j)
            neighbors[j].append(i)
        return tuple(tuple(sorted(n)) for n in neighbors)

    def neighbors(self, i: int) -> tuple[int, ...]:
        return self.adjacency[i]

    @property
    def sorted_edges(self) -> list[tuple[int, int]]:
        return sorted(self.edges)

    @property
    def degrees(self) -> np.ndarray:
        return np.array([len(n) for n in self.adjacency], dtype=np.int64)

    @property
    def max_degree(self) -> int:
        return int(self.degrees.max()) if self.m else 0

    def laplacian(self, weights: np.ndarray | None = None) -> np.ndarray:
        """Combinatorial Laplacian, optionally with per-edge weights in ``sorted_edges`` order."""
        lap = np.zeros((self.m, self.m))
        edges = self.sorted_edges
        if weights is None:
            weights = np.ones(len(edges))
        for (i, j), w in zip(edges, weights):
            lap[i, j] -= w
            lap[j, i] -= w
            lap[i, i] += w
            lap[j, j] += w
        return lap

    def is_connected(self) -> bool:
        if self.m == 1:
            return True
        rows = [i for i, _ in self.edges]
        cols = [j for _, j in self.edges]
        return _count_components(self.m, rows, cols) == 1

    def to_dict(self) -> dict[str, Any]:
        return {"m": self.m, "edges": [[i, j] for i, j in self.sorted_edges]}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> Graph:
        return cls.from_edges(int(data["m"]), data["edges"])


@dataclass(frozen=True)
class Spectrum:
    """Eigenvalues ordered nonincreasingly in magnitude."""

    eigenvalues: np.ndarray

    @property
    def lambda1(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def lambda2(self) -> float:
        if len(self.eigenvalues) < 2:
            return 0.0
        return float(abs(self.eigenvalues[1]))

    @property
    def smallest(self) -> float:
        return float(self.eigenvalues.min())


@dataclass(frozen=True, eq=False)
class AveragingMatrix:
    """Dense symmetric averaging matrix; the upper triangle of ``entries`` is authoritative."""

    entries: np.ndarray

    def __post_init__(self) -> None:
        a = np.array(self.entries, dtype=np.float64)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise InputError(f"averaging matrix must be square, got shape {a.shape}")
        sym = np.triu(a) + np.triu(a, 1).T
        sym.setflags(write=False)
        object.__setattr__(self, "entries", sym)

    @classmethod
    def identity(cls, m: int) -> AveragingMatrix:
        return cls(np.eye(m))

    @property
    def m(self) -> int:
        return int(self.entries.shape[0])

    @cached_property
    def spectrum(self) -> Spectrum:
        return spectrum(self)

    def average(self, x: np.ndarray) -> np.ndarray:
        return self.entries @ x

    def to_dict(self) -> dict[str, Any]:
        return {"m": self.m, "rows": self.entries.tolist()}

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> AveragingMatrix:
        rows = np.array(data["rows"], dtype=np.float64)
        if rows.shape != (int(data["m"]), int(data["m"])):
            raise InputError(f"rows shape {rows.shape} does not match m={data['m']}")
        return cls(rows)


def jacobi_eigh(
    a: np.ndarray, tol: float = JACOBI_TOL, max_sweeps: int = JACOBI_MAX_SWEEPS
) -> tuple[np.ndarray, np.ndarray]:
    """Cyclic Jacobi eigen-decomposition of a symmetric matrix.

    Returns ``(values, vectors)`` with ``a @ vectors[:, k] = values[k] * vectors[:, k]``.
    Raises :class:`EigenSolverError` when the off-diagonal Frobenius norm is still
    above ``tol`` after ``max_sweeps`` sweeps.
    """
    a = np.array(a, dtype=np.float64)
    n = a.shape[0]
    vectors = np.eye(n)
    for _ in range(max_sweeps):
        off = np.linalg.norm(a - np.diag(np.diag(a)))
        if off <= tol:
            return np.diag(a).copy(), vectors
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.copysign(1.0, theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0
                vec_p, vec_q = vectors[:, p].copy(), vectors[:, q].copy()
                vectors[:, p] = c * vec_p - s * vec_q
                vectors[:, q] = s * vec_p + c * vec_q
    off = np.linalg.norm(a - np.diag(np.diag(a)))
    if off <= tol:
        return np.diag(a).copy(), vectors
    raise EigenSolverError(
        f"Jacobi did not converge in {max_sweeps} sweeps (off-diagonal norm {off:.3e})"
    )


def spectrum(P: AveragingMatrix) -> Spectrum:
    values, _ = jacobi_eigh(P.entries)
    order = np.lexsort((-values, -np.abs(values)))
    return Spectrum(eigenvalues=values[order])


def gen_erdos_renyi(
    m: int, p_edge: float, seed: int, max_attempts: int = MAX_REDRAWS
) -> Graph:
    """Connected G(m, p) graph; pairs drawn in lexicographic order, attempt k seeded with seed+k."""
    if m < 2:
        raise InputError(f"need at least 2 vertices, got {m}")
    if not 0.0 < p_edge <= 1.0:
        raise InputError(f"edge probability must lie in (0, 1], got {p_edge}")
    pairs = list(combinations(range(m), 2))
    for attempt in range(max_attempts):
        draws = Xoshiro256StarStar((seed + attempt) & MASK64).uniform(len(pairs))
        graph = Graph(m, frozenset(pair for pair, u in zip(pairs, draws) if u < p_edge))
        if graph.is_connected():
            if attempt:
                logger.debug("Connected graph found after %d redraws", attempt)
            return graph
    raise GraphConnectivityError(
        f"no connected graph in {max_attempts} draws (m={m}, p_edge={p_edge}); "
        "edge probability too small"
    )


def build_laplacian_averaging(g: Graph) -> AveragingMatrix:
    """P = I - L / (2 d_max)."""
    if not g.is_connected():
        raise GraphConnectivityError("averaging matrix requires a connected graph")
    if g.m == 1:
        return AveragingMatrix.identity(1)
    alpha = 1.0 / (2.0 * g.max_degree)
    return AveragingMatrix(np.eye(g.m) - alpha * g.laplacian())


def _project_edge_weights(g: Graph, weights: np.ndarray) -> np.ndarray:
    w = np.maximum(weights, 0.0)
    edges = g.sorted_edges
    load = np.zeros(g.m)
    for (i, j), wk in zip(edges, w):
        load[i] += wk
        load[j] += wk
    scale = np.array([1.0 / max(1.0, load[i], load[j]) for i, j in edges])
    return w * scale


def _psd_candidate(P: np.ndarray) -> tuple[np.ndarray, float]:
    values = np.linalg.eigvalsh(P)
    if values[0] >= -PSD_TOL:
        return P, float(values[-2])
    return (P + np.eye(len(P))) / 2.0, float((1.0 + values[-2]) / 2.0)


def optimize_averaging_matrix(
    g: Graph, iters: int, step: float | None = None
) -> AveragingMatrix:
    """Shrink |λ₂(P)| by projected subgradient descent on symmetric edge weights.

    Minimizes ``max(λ₂(P), -λ_m(P))`` over ``P = I - L(w)`` with ``w >= 0`` and
    nonnegative diagonal. Every iterate is scored after the PSD fix
    ``(P + I) / 2`` (skipped when P is already PSD) and the best scored matrix
    wins, seeded with the Laplacian construction and the best PSD member of
    the ``I - αL`` family, so the result never does worse than either.
    """
    if iters < 1:
        raise InputError(f"iters must be >= 1, got {iters}")
    baseline = build_laplacian_averaging(g)
    if g.m == 1:
        return baseline
    eye = np.eye(g.m)
    lap = g.laplacian()
    lap_values = np.linalg.eigvalsh(lap)
    mu2, mu_max = float(lap_values[1]), float(lap_values[-1])

    best, best_score = _psd_candidate(baseline.entries)
    candidate, score = _psd_candidate(eye - lap / mu_max)
    if score < best_score:
        best, best_score = candidate, score
    baseline_score = best_score

    edges = g.sorted_edges
    ei = np.array([i for i, _ in edges])
    ej = np.array([j for _, j in edges])
    w = _project_edge_weights(g, np.full(len(edges), 2.0 / (mu2 + mu_max)))
    step0 = step if step is not None else 1.0 / g.max_degree

    for k in range(1, iters + 1):
        P = eye - g.laplacian(w)
        values, vectors = np.linalg.eigh(P)
        candidate, score = _psd_candidate(P)
        if score < best_score:
            best, best_score = candidate, score
        if values[-2] >= -values[0]:
            u = vectors[:, -2]
            subgradient = -((u[ei] - u[ej]) ** 2)
        else:
            v = vectors[:, 0]
            subgradient = (v[ei] - v[ej]) ** 2
        norm = np.linalg.norm(subgradient)
        if norm == 0.0:
            break
        w = _project_edge_weights(g, w - (step0 / np.sqrt(k)) * subgradient / norm)

    logger.info(
        "Optimized averaging matrix: |λ₂| %.6f (start %.6f) after %d iterations",
        best_score,
        baseline_score,
        iters,
    )
    return AveragingMatrix(best)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    violation: float


@dataclass(frozen=True)
class ValidityReport:
    checks: tuple[CheckResult, ...]

    @property
    def ok(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def failed(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]


def validate_averaging(P: AveragingMatrix, g: Graph) -> ValidityReport:
    a = P.entries
    m = P.m
    checks = [CheckResult("dimension", m == g.m, float(abs(m - g.m)))]

    asym = float(np.max(np.abs(a - a.T)))
    checks.append(CheckResult("symmetric", asym == 0.0, asym))

    negative = float(max(0.0, -a.min()))
    checks.append(CheckResult("nonnegative", negative == 0.0, negative))

    row_error = float(np.max(np.abs(a.sum(axis=1) - 1.0)))
    checks.append(CheckResult("stochastic", row_error <= STOCHASTIC_TOL, row_error))

    if m == g.m:
        outside = np.abs(a) * (1.0 - np.eye(m))
        for i, j in g.edges:
            outside[i, j] = outside[j, i] = 0.0
        off_support = float(outside.max())
        checks.append(CheckResult("support", off_support == 0.0, off_support))

    try:
        smallest = float(jacobi_eigh(a)[0].min())
        checks.append(CheckResult("psd", smallest >= -PSD_TOL, max(0.0, -smallest)))
    except EigenSolverError:
        checks.append(CheckResult("psd", False, float("inf")))

    rows, cols = np.nonzero((a > 0) & ~np.eye(m, dtype=bool))
    components = _count_components(m, rows, cols)
    checks.append(CheckResult("irreducible", components == 1, float(components - 1)))

    return ValidityReport(tuple(checks))
