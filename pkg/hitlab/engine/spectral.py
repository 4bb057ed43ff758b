from __future__ import annotations
from dataclasses import dataclass, field
import logging
from typing import List, NamedTuple, Optional

import numpy as np

from .graph_model import GraphSample, _check_vertex, stationary_distribution
from .rng import derive_seed, make_generator
from ..constants import (
    CANONICAL_PROJECTION_TOLERANCE,
    DEGENERACY_TOLERANCE,
    NEAR_DISCONNECTED_GAP,
    ORTHONORMALITY_TOLERANCE,
    RESIDUAL_TOLERANCE_PER_N,
    SPECTRAL_GAP_ENVELOPE,
    TOP_EIGENVALUE_TOLERANCE,
)
from ..errors import (
    ConvergenceFailure,
    DimensionMismatch,
    InvalidProbability,
    InvalidSize,
    IsolatedVertex,
    NearDisconnected,
    SpectralInvariantError,
)

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class NormalizedAdjacency:
    """B = D^{-1/2} A D^{-1/2} with the degrees it was built from."""
    n: int
    entries: np.ndarray = field(repr=False)
    degrees: np.ndarray = field(repr=False)

    def row_eigen_residual(self) -> float:
        """max_i |sum_j b_ij sqrt(d_j) - sqrt(d_i)|, zero when B w = w."""
        w = np.sqrt(self.degrees.astype(float))
        return float(np.max(np.abs(self.entries @ w - w)))


@dataclass(frozen=True, eq=False)
class SpectralDecomposition:
    """
    Eigenpairs of B, eigenvalues descending, eigenvectors as columns.

    ``eigenvectors[:, k]`` is v_{k+1}; component j of it is v_{k+1, j}.
    ``degenerate`` is set when two eigenvalues coincide within
    DEGENERACY_TOLERANCE.
    """
    eigenvalues: np.ndarray = field(repr=False)
    eigenvectors: np.ndarray = field(repr=False)
    residual: float
    degenerate: bool = False

    @property
    def n(self) -> int:
        return len(self.eigenvalues)

    def component_squares(self, j: int) -> np.ndarray:
        """v_{k,j}^2 for every k."""
        return self.eigenvectors[j, :] ** 2


class SpectralIdentityReport(NamedTuple):
    norm_residual: float
    trace_residual: float
    stationary_residual: float


class GapStatistic(NamedTuple):
    max_abs_nontrivial: float
    normalized_ratio: float


class DelocalizationStatistic(NamedTuple):
    max_inf_norm_sq: float
    conjecture_ratio: float
    degenerate: bool
    min_participation_ratio: float


class TraceDiagnostics(NamedTuple):
    eigenvalue_sum: float
    eigenvalue_square_sum: float
    frobenius_square: float
    lambda_sq_term: Optional[float]


def build_normalized_adjacency(g: GraphSample) -> NormalizedAdjacency:
    degrees = g.degrees
    isolated = np.flatnonzero(degrees == 0)
    if len(isolated):
        raise IsolatedVertex(f"vertex {int(isolated[0])} has degree 0")
    d = degrees.astype(float)
    entries = np.where(g.adjacency, 1.0 / np.sqrt(np.outer(d, d)), 0.0)
    entries.setflags(write=False)
    return NormalizedAdjacency(n=g.n, entries=entries, degrees=degrees)


def _degenerate_groups(eigenvalues: np.ndarray) -> List[np.ndarray]:
    groups = []
    start = 0
    for k in range(1, len(eigenvalues) + 1):
        if k == len(eigenvalues) or eigenvalues[k - 1] - eigenvalues[k] > DEGENERACY_TOLERANCE:
            if k - start > 1:
                groups.append(np.arange(start, k))
            start = k
    return groups


def _canonical_signs(vectors: np.ndarray) -> np.ndarray:
    """Flip each column so its first non-negligible component is positive."""
    nonzero = np.abs(vectors) > DEGENERACY_TOLERANCE
    first = np.argmax(nonzero, axis=0)
    signs = np.sign(vectors[first, np.arange(vectors.shape[1])])
    signs[signs == 0] = 1.0
    return vectors * signs


def canonical_eigenspace_basis(block: np.ndarray) -> np.ndarray:
    """
    Canonical orthonormal basis of the span of ``block`` (n x m, orthonormal
    columns): the standard basis vectors e_0, e_1, ... are projected onto the
    span in index order and Gram-Schmidt orthonormalized, skipping those that
    add no new direction. Depends only on the subspace, not on ``block``.
    """
    n, m = block.shape
    basis = np.empty((n, m))
    found = 0
    for i in range(n):
        if found == m:
            break
        v = block @ block[i, :]
        for _ in range(2):
            v = v - basis[:, :found] @ (basis[:, :found].T @ v)
        norm = np.linalg.norm(v)
        if norm > CANONICAL_PROJECTION_TOLERANCE:
            basis[:, found] = v / norm
            found += 1
    if found < m:
        raise ConvergenceFailure(f"could not canonicalize a {m}-dimensional eigenspace")
    return basis


def eigendecompose(B: NormalizedAdjacency, basis_seed: Optional[int] = None) -> SpectralDecomposition:
    """
    Full symmetric eigendecomposition of B (LAPACK syevd through numpy).

    Degenerate eigenspaces get the canonical basis of
    canonical_eigenspace_basis. With ``basis_seed`` each of them is instead
    rotated by a seeded random orthogonal matrix; the hitting-time
    quantities must not change under such a rotation. Every column then gets
    the sign convention of _canonical_signs.
    """
    M = B.entries
    n = B.n
    try:
        w, V = np.linalg.eigh(M)
    except np.linalg.LinAlgError as e:
        raise ConvergenceFailure(f"eigh failed for n={n}: {e}") from e

    order = np.argsort(-w, kind="stable")
    w = w[order]
    V = V[:, order]

    groups = _degenerate_groups(w)
    for grp in groups:
        if basis_seed is None:
            V[:, grp] = canonical_eigenspace_basis(V[:, grp])
        else:
            rng = make_generator(derive_seed(basis_seed, int(grp[0])))
            Q, _ = np.linalg.qr(rng.standard_normal((len(grp), len(grp))))
            V[:, grp] = V[:, grp] @ Q
    V = _canonical_signs(V)

    residual = float(np.max(np.abs(M @ V - V * w))) if n else 0.0
    if residual > RESIDUAL_TOLERANCE_PER_N * n:
        raise ConvergenceFailure(f"eigen residual {residual:.3e} exceeds {RESIDUAL_TOLERANCE_PER_N * n:.3e}")
    ortho = float(np.max(np.abs(V.T @ V - np.eye(n))))
    if ortho > ORTHONORMALITY_TOLERANCE:
        raise ConvergenceFailure(f"eigenvectors not orthonormal (deviation {ortho:.3e})")
    if abs(w[0] - 1.0) > TOP_EIGENVALUE_TOLERANCE:
        raise SpectralInvariantError(f"top eigenvalue {w[0]!r} differs from 1")

    degenerate = bool(groups)
    if degenerate:
        logger.debug(f"Degenerate eigenspaces in n={n} decomposition: {[len(g) for g in groups]}")

    w.setflags(write=False)
    V.setflags(write=False)
    return SpectralDecomposition(eigenvalues=w, eigenvectors=V, residual=residual, degenerate=degenerate)


def require_spectral_gap(dec: SpectralDecomposition) -> None:
    if dec.n >= 2 and 1.0 - dec.eigenvalues[1] < NEAR_DISCONNECTED_GAP:
        raise NearDisconnected(f"1 - lambda_2 = {1.0 - dec.eigenvalues[1]:.3e} is below {NEAR_DISCONNECTED_GAP}")


def verify_spectral_identities(dec: SpectralDecomposition, g: GraphSample, j: int) -> SpectralIdentityReport:
    j = _check_vertex(g, j)
    if dec.n != g.n:
        raise DimensionMismatch(f"decomposition has dimension {dec.n}, graph has {g.n} vertices")
    sq = dec.component_squares(j)
    pi = stationary_distribution(g)
    return SpectralIdentityReport(
        norm_residual=float(abs(sq.sum() - 1.0)),
        trace_residual=float(abs(np.dot(dec.eigenvalues, sq))),
        stationary_residual=float(abs(sq[0] - pi[j])),
    )


def _check_scale(n: int, p: float) -> None:
    if n < 2:
        raise InvalidSize(f"n must be >= 2, got {n}")
    if not (0.0 < p <= 1.0):
        raise InvalidProbability(f"p must lie in (0, 1], got {p}")


def spectral_gap_statistic(dec: SpectralDecomposition, n: int, p: float) -> GapStatistic:
    _check_scale(n, p)
    max_abs = float(np.max(np.abs(dec.eigenvalues[1:])))
    return GapStatistic(max_abs, float(max_abs * np.sqrt(n * p) / SPECTRAL_GAP_ENVELOPE))


def delocalization_statistic(dec: SpectralDecomposition, n: int, p: float) -> DelocalizationStatistic:
    """
    max_{k>=2} ||v_k||_inf^2 and its ratio to sqrt(p/n).

    Basis dependent on degenerate eigenspaces; ``degenerate`` flags that case.
    """
    _check_scale(n, p)
    nontrivial = dec.eigenvectors[:, 1:]
    max_inf_sq = float(np.max(np.abs(nontrivial)) ** 2)
    ipr = 1.0 / np.sum(nontrivial ** 4, axis=0)
    return DelocalizationStatistic(
        max_inf_norm_sq=max_inf_sq,
        conjecture_ratio=float(max_inf_sq / np.sqrt(p / n)),
        degenerate=dec.degenerate,
        min_participation_ratio=float(np.min(ipr)),
    )


def trace_diagnostics(
    B: NormalizedAdjacency, dec: SpectralDecomposition, p: Optional[float] = None
) -> TraceDiagnostics:
    lam = dec.eigenvalues
    return TraceDiagnostics(
        eigenvalue_sum=float(lam.sum()),
        eigenvalue_square_sum=float(np.dot(lam, lam)),
        frobenius_square=float(np.sum(B.entries ** 2)),
        lambda_sq_term=None if p is None else float(p * np.dot(lam[1:], lam[1:])),
    )


def normalized_laplacian_spectrum(dec: SpectralDecomposition) -> np.ndarray:
    """Eigenvalues of I - B in ascending order (eigenvectors are those of B)."""
    return 1.0 - dec.eigenvalues
