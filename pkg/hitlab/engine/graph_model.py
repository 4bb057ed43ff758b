from __future__ import annotations
from dataclasses import dataclass, field
import logging
from typing import Iterable, NamedTuple, Optional, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from .rng import RNG_ID, make_generator
from ..constants import PI_SUM_TOLERANCE
from ..errors import (
    IndexOutOfRange,
    InvalidProbability,
    InvalidSize,
    IsolatedVertex,
    MonotonicityViolation,
    NotConnected,
)
from ..settings import COUPLING_MODES

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class GraphSample:
    """One realization of G(n, p) as a dense boolean adjacency matrix."""
    n: int
    p: float
    adjacency: np.ndarray
    seed: int
    rng_id: str = RNG_ID

    def __post_init__(self):
        adj = np.asarray(self.adjacency, dtype=bool)
        if adj.shape != (self.n, self.n):
            raise InvalidSize(f"adjacency shape {adj.shape} does not match n={self.n}")
        adj = adj.copy()
        adj.setflags(write=False)
        object.__setattr__(self, "adjacency", adj)

    @classmethod
    def from_edges(
        cls,
        n: int,
        edges: Iterable[Tuple[int, int]],
        p: float = 1.0,
        seed: int = 0,
        rng_id: str = RNG_ID,
    ) -> "GraphSample":
        adj = np.zeros((n, n), dtype=bool)
        for i, j in edges:
            if i == j:
                raise InvalidSize(f"self-loop at vertex {i}")
            adj[i, j] = adj[j, i] = True
        return cls(n=n, p=p, adjacency=adj, seed=seed, rng_id=rng_id)

    @property
    def degrees(self) -> np.ndarray:
        return self.adjacency.sum(axis=1).astype(np.int64)

    @property
    def edge_count(self) -> int:
        return int(np.triu(self.adjacency, 1).sum())

    def edges(self) -> np.ndarray:
        """Edge array of shape (|E|, 2), rows (i, j) with i < j in row-major order."""
        i, j = np.nonzero(np.triu(self.adjacency, 1))
        return np.column_stack([i, j]).astype(np.int64)

    def identical(self, other: "GraphSample") -> bool:
        return (
            self.n == other.n
            and self.p == other.p
            and self.seed == other.seed
            and self.rng_id == other.rng_id
            and np.array_equal(self.adjacency, other.adjacency)
        )


@dataclass
class CoupledSequenceState:
    """
    Edge-indicator state of a coupled graph sequence.

    In ``increasing`` mode ``indicators`` holds the complement graph, whose
    edge probability 1 - p decreases as p grows.
    """
    current_n: int
    current_p: float
    mode: str
    indicators: np.ndarray
    seed_stream: np.random.Generator
    seed: int
    advances: int = 0

    @property
    def stored_probability(self) -> float:
        return self.current_p if self.mode == "decreasing" else 1.0 - self.current_p


class GraphStatistics(NamedTuple):
    edge_count: int
    degree_j: int
    excluded_edge_count: int


@dataclass(frozen=True, eq=False)
class StationaryDistribution:
    pi: np.ndarray = field(repr=False)

    def __getitem__(self, i: int) -> float:
        return float(self.pi[i])

    def __len__(self) -> int:
        return len(self.pi)


def _check_size(n: int) -> int:
    if int(n) != n or n < 1:
        raise InvalidSize(f"n must be an integer >= 1, got {n}")
    return int(n)


def _check_probability(p: float, open_interval: bool = False) -> float:
    p = float(p)
    if open_interval:
        if not (0.0 < p < 1.0):
            raise InvalidProbability(f"p must lie in (0, 1), got {p}")
    elif not (0.0 <= p <= 1.0):
        raise InvalidProbability(f"p must lie in [0, 1], got {p}")
    return p


def _check_vertex(g: GraphSample, j: int) -> int:
    if not (0 <= j < g.n):
        raise IndexOutOfRange(f"vertex {j} outside 0..{g.n - 1}")
    return int(j)


def _bernoulli_upper(rng: np.random.Generator, n: int, p: float) -> np.ndarray:
    """Symmetric loop-free indicator matrix; pairs drawn row-major over i < j."""
    adj = np.zeros((n, n), dtype=bool)
    iu = np.triu_indices(n, 1)
    adj[iu] = rng.random(len(iu[0])) < p
    return adj | adj.T


def sample_er_graph(n: int, p: float, seed: int) -> GraphSample:
    n = _check_size(n)
    p = _check_probability(p)
    adj = _bernoulli_upper(make_generator(seed), n, p)
    logger.debug(f"Sampled G({n}, {p}) seed={seed}: |E|={int(adj.sum()) // 2}")
    return GraphSample(n=n, p=p, adjacency=adj, seed=int(seed))


def _materialize(state: CoupledSequenceState) -> GraphSample:
    adj = state.indicators
    if state.mode == "increasing":
        adj = ~adj
        np.fill_diagonal(adj, False)
    return GraphSample(n=state.current_n, p=state.current_p, adjacency=adj, seed=state.seed)


def start_coupled_sequence(
    n: int, p: float, seed: int, mode: str = "decreasing"
) -> Tuple[CoupledSequenceState, GraphSample]:
    n = _check_size(n)
    p = _check_probability(p, open_interval=True)
    if mode not in COUPLING_MODES:
        raise ValueError(f"mode must be one of {COUPLING_MODES}, got {mode!r}")
    rng = make_generator(seed)
    stored_p = p if mode == "decreasing" else 1.0 - p
    state = CoupledSequenceState(
        current_n=n,
        current_p=p,
        mode=mode,
        indicators=_bernoulli_upper(rng, n, stored_p),
        seed_stream=rng,
        seed=int(seed),
    )
    return state, _materialize(state)


def advance_coupled_sequence(
    state: CoupledSequenceState, p_next: float
) -> Tuple[CoupledSequenceState, GraphSample]:
    """
    Add one vertex and move the edge probability to ``p_next``.

    Existing stored indicators survive with probability q_next / q (q being
    the stored graph's edge probability); absent ones stay absent. The new
    vertex's n indicators are fresh Bernoulli(q_next) draws. The state is
    advanced in place and returned together with the materialized graph.
    """
    p_next = _check_probability(p_next, open_interval=True)
    if state.mode == "decreasing" and p_next > state.current_p:
        raise MonotonicityViolation(
            f"decreasing sequence requires p_next <= {state.current_p}, got {p_next}"
        )
    if state.mode == "increasing" and p_next < state.current_p:
        raise MonotonicityViolation(
            f"increasing sequence requires p_next >= {state.current_p}, got {p_next}"
        )

    n = state.current_n
    q = state.stored_probability
    q_next = p_next if state.mode == "decreasing" else 1.0 - p_next
    retention = q_next / q

    rng = state.seed_stream
    iu = np.triu_indices(n, 1)
    kept = state.indicators[iu] & (rng.random(len(iu[0])) < retention)
    fresh = rng.random(n) < q_next

    ind = np.zeros((n + 1, n + 1), dtype=bool)
    ind[iu] = kept
    ind[:n, n] = fresh
    ind |= ind.T

    state.indicators = ind
    state.current_n = n + 1
    state.current_p = p_next
    state.advances += 1
    return state, _materialize(state)


def graph_statistics(g: GraphSample, j: int) -> GraphStatistics:
    j = _check_vertex(g, j)
    edge_count = g.edge_count
    degree_j = int(g.adjacency[j].sum())
    return GraphStatistics(edge_count, degree_j, edge_count - degree_j)


def stationary_distribution(g: GraphSample) -> StationaryDistribution:
    degrees = g.degrees
    isolated = np.flatnonzero(degrees == 0)
    if len(isolated):
        raise IsolatedVertex(f"vertex {int(isolated[0])} has degree 0")
    pi = degrees / degrees.sum()
    total = float(pi.sum())
    if abs(total - 1.0) > PI_SUM_TOLERANCE:
        logger.warning(f"Stationary distribution sums to {total!r}")
    pi.setflags(write=False)
    return StationaryDistribution(pi=pi)


def is_connected(g: GraphSample) -> bool:
    if g.n == 1:
        return True
    reached = breadth_first_order(
        csr_matrix(g.adjacency), 0, directed=False, return_predecessors=False
    )
    return len(reached) == g.n


def require_connected(g: GraphSample, exc: Optional[type] = None) -> None:
    if not is_connected(g):
        raise (exc or NotConnected)(f"graph on {g.n} vertices is not connected")
