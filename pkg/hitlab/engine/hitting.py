"""
Hitting times of the simple random walk on a graph sample.

Three independent routes to H_ij:
  - spectral: closed form over the eigenpairs of B
  - solve: first-step analysis, one dense linear system per target
  - mc: direct simulation of the walk
"""

from __future__ import annotations
from dataclasses import dataclass, field
import logging
from typing import NamedTuple, Optional, Tuple

import numpy as np
import scipy.linalg

from .graph_model import GraphSample, require_connected, stationary_distribution
from .rng import derive_seed, make_generator
from .spectral import SpectralDecomposition, require_spectral_gap
from ..constants import MC_CHUNK_TRIALS, MC_STEP_CAP
from ..errors import (
    DimensionMismatch,
    IndexOutOfRange,
    InvalidSize,
    SameVertex,
    SingularSystem,
    StepCapExceeded,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class HittingProfile:
    """Hitting quantities for one target vertex j (H_jj = 0 by convention)."""
    target_j: int
    method: str
    H_j: float
    pi_j: float
    H_column: Optional[np.ndarray] = field(default=None, repr=False)
    H_i_row: Optional[np.ndarray] = field(default=None, repr=False)
    spectral_sum: Optional[float] = None
    Z_n: Optional[float] = None
    std_error: Optional[float] = None
    trials: Optional[int] = None


class DecompositionTerms(NamedTuple):
    spectral_sum: float
    pi_j: float
    Z_n: float


class MonteCarloEstimate(NamedTuple):
    mean: float
    std_error: float
    trials: int


def _check_vertex(g: GraphSample, v: int) -> int:
    if not (0 <= v < g.n):
        raise IndexOutOfRange(f"vertex {v} outside 0..{g.n - 1}")
    return int(v)


def _check_pair(g: GraphSample, i: int, j: int) -> Tuple[int, int]:
    i, j = _check_vertex(g, i), _check_vertex(g, j)
    if i == j:
        raise SameVertex(f"start and target are both {i}")
    return i, j


def _check_decomposition(dec: SpectralDecomposition, g: GraphSample) -> None:
    if dec.n != g.n:
        raise DimensionMismatch(f"decomposition has dimension {dec.n}, graph has {g.n} vertices")
    require_spectral_gap(dec)


def _weighted_nontrivial(dec: SpectralDecomposition) -> np.ndarray:
    """Columns v_k / sqrt(1 - lambda_k) for k >= 2."""
    return dec.eigenvectors[:, 1:] / np.sqrt(1.0 - dec.eigenvalues[1:])


def hitting_time_spectral(dec: SpectralDecomposition, g: GraphSample, i: int, j: int) -> float:
    i, j = _check_pair(g, i, j)
    _check_decomposition(dec, g)
    d = g.degrees.astype(float)
    vi = dec.eigenvectors[i, 1:]
    vj = dec.eigenvectors[j, 1:]
    weights = 1.0 / (1.0 - dec.eigenvalues[1:])
    terms = weights * (vj ** 2 / d[j] - vi * vj / np.sqrt(d[i] * d[j]))
    return float(2 * g.edge_count * terms.sum())


def hitting_matrix_spectral(dec: SpectralDecomposition, g: GraphSample) -> np.ndarray:
    """H[i, j] for all pairs; basis invariant since it only uses U U^T."""
    _check_decomposition(dec, g)
    U = _weighted_nontrivial(dec)
    K = U @ U.T
    d = g.degrees.astype(float)
    s = 1.0 / np.sqrt(d)
    H = 2 * g.edge_count * (np.diag(K) / d - K * np.outer(s, s))
    np.fill_diagonal(H, 0.0)
    return H


def sum_decomposition(dec: SpectralDecomposition, g: GraphSample, j: int) -> DecompositionTerms:
    """S_j = sum_{k>=2} v_kj^2 / (1 - lambda_k) split as 1 - 2 pi_j + Z_n."""
    j = _check_vertex(g, j)
    _check_decomposition(dec, g)
    lam = dec.eigenvalues[1:]
    sq = dec.component_squares(j)[1:]
    inv_gap = 1.0 / (1.0 - lam)
    pi = stationary_distribution(g)
    return DecompositionTerms(
        spectral_sum=float(np.dot(inv_gap, sq)),
        pi_j=pi[j],
        Z_n=float(np.dot(inv_gap * lam ** 2, sq)),
    )


def mean_target_hitting_spectral(dec: SpectralDecomposition, g: GraphSample, j: int) -> HittingProfile:
    terms = sum_decomposition(dec, g, j)
    d_j = int(g.degrees[j])
    H_j = 2 * g.edge_count / d_j * terms.spectral_sum

    U = _weighted_nontrivial(dec)
    d = g.degrees.astype(float)
    k_col = U @ U[j]
    column = 2 * g.edge_count * (k_col[j] / d[j] - k_col / np.sqrt(d * d[j]))
    column[j] = 0.0
    return HittingProfile(
        target_j=j,
        method="spectral",
        H_j=float(H_j),
        pi_j=terms.pi_j,
        H_column=column,
        spectral_sum=terms.spectral_sum,
        Z_n=terms.Z_n,
    )


def hitting_times_solve(g: GraphSample, j: int) -> np.ndarray:
    """
    Solve h_i = 1 + sum_k P_ik h_k (i != j), h_j = 0 by dense LU.

    Independent of the eigensolver; used as the reference oracle.
    """
    j = _check_vertex(g, j)
    require_connected(g)
    h = np.zeros(g.n)
    if g.n == 1:
        return h
    keep = np.arange(g.n) != j
    P = g.adjacency / g.degrees[:, None].astype(float)
    M = np.eye(g.n - 1) - P[np.ix_(keep, keep)]
    try:
        h[keep] = scipy.linalg.solve(M, np.ones(g.n - 1), check_finite=False)
    except np.linalg.LinAlgError as e:
        raise SingularSystem(f"absorbing system for target {j} is singular: {e}") from e
    return h


def hitting_time_solve(g: GraphSample, i: int, j: int) -> float:
    i, j = _check_pair(g, i, j)
    return float(hitting_times_solve(g, j)[i])


def hitting_matrix_solve(g: GraphSample) -> np.ndarray:
    H = np.empty((g.n, g.n))
    for j in range(g.n):
        H[:, j] = hitting_times_solve(g, j)
    return H


def mean_target_hitting_solve(g: GraphSample, j: int) -> HittingProfile:
    column = hitting_times_solve(g, j)
    pi = stationary_distribution(g)
    return HittingProfile(
        target_j=int(j),
        method="solve",
        H_j=float(np.dot(pi.pi, column)),
        pi_j=pi[j],
        H_column=column,
    )


def _neighbor_table(g: GraphSample) -> Tuple[np.ndarray, np.ndarray]:
    """Padded neighbor lists (n x max_degree) and degrees."""
    degrees = g.degrees
    table = np.zeros((g.n, max(int(degrees.max()), 1)), dtype=np.int64)
    for v in range(g.n):
        nbrs = np.flatnonzero(g.adjacency[v])
        table[v, : len(nbrs)] = nbrs
    return table, degrees


def _simulate_chunk(
    table: np.ndarray, degrees: np.ndarray, i: int, j: int, trials: int, seed: int
) -> np.ndarray:
    rng = make_generator(seed)
    pos = np.full(trials, i, dtype=np.int64)
    steps = np.zeros(trials, dtype=np.int64)
    active = np.arange(trials)
    t = 0
    while len(active):
        if t >= MC_STEP_CAP:
            raise StepCapExceeded(f"walk from {i} did not reach {j} within {MC_STEP_CAP} steps")
        cur = pos[active]
        choice = rng.integers(0, degrees[cur])
        nxt = table[cur, choice]
        pos[active] = nxt
        t += 1
        hit = nxt == j
        steps[active[hit]] = t
        active = active[~hit]
    return steps


def hitting_time_mc(g: GraphSample, i: int, j: int, trials: int, seed: int) -> MonteCarloEstimate:
    """
    Mean first-hit step count over ``trials`` simulated walks.

    Trials run in chunks of MC_CHUNK_TRIALS; chunk c draws from
    derive_seed(seed, c), and results are concatenated in chunk order.
    """
    i, j = _check_pair(g, i, j)
    if trials < 1:
        raise InvalidSize(f"trials must be >= 1, got {trials}")
    require_connected(g)
    table, degrees = _neighbor_table(g)
    logger.debug(f"Monte Carlo H_{i}{j}: {trials} trials on n={g.n}")

    chunks = []
    for c, start in enumerate(range(0, trials, MC_CHUNK_TRIALS)):
        size = min(MC_CHUNK_TRIALS, trials - start)
        chunks.append(_simulate_chunk(table, degrees, i, j, size, derive_seed(seed, c)))
    steps = np.concatenate(chunks).astype(float)

    std_error = float(steps.std(ddof=1) / np.sqrt(trials)) if trials > 1 else 0.0
    return MonteCarloEstimate(float(steps.mean()), std_error, int(trials))


def mean_target_hitting_mc(g: GraphSample, j: int, trials: int, seed: int) -> HittingProfile:
    """H_j estimated from one Monte Carlo column; start i uses derive_seed(seed, i)."""
    j = _check_vertex(g, j)
    pi = stationary_distribution(g)
    means = np.zeros(g.n)
    errors = np.zeros(g.n)
    for i in range(g.n):
        if i == j:
            continue
        est = hitting_time_mc(g, i, j, trials, derive_seed(seed, i))
        means[i], errors[i] = est.mean, est.std_error
    return HittingProfile(
        target_j=j,
        method="mc",
        H_j=float(np.dot(pi.pi, means)),
        pi_j=pi[j],
        H_column=means,
        std_error=float(np.sqrt(np.dot(pi.pi ** 2, errors ** 2))),
        trials=int(trials),
    )


def mean_hitting_aggregates(g: GraphSample, H: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """
    (H_j for every target j, H^i for every start i) from a full H matrix
    with H[i, j] = H_ij.
    """
    H = np.asarray(H, dtype=float)
    if H.shape != (g.n, g.n):
        raise DimensionMismatch(f"H has shape {H.shape}, expected ({g.n}, {g.n})")
    pi = stationary_distribution(g).pi
    return pi @ H, H @ pi
