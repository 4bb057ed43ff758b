"""
JSON payloads for the spectrum, hit and diag verbs.
"""

from __future__ import annotations
from typing import Any, Dict, Optional

import numpy as np

from ..constants import DECOMPOSITION_TOLERANCE
from ..engine.clt_harness import ExperimentReport, negligibility_diagnostics
from ..engine.graph_model import GraphSample
from ..engine.hitting import HittingProfile, MonteCarloEstimate
from ..engine.spectral import (
    NormalizedAdjacency,
    SpectralDecomposition,
    delocalization_statistic,
    spectral_gap_statistic,
    trace_diagnostics,
    verify_spectral_identities,
)


def graph_metadata(g: GraphSample) -> Dict[str, Any]:
    return {"n": g.n, "p": g.p, "seed": g.seed, "rng_id": g.rng_id, "edge_count": g.edge_count}


def spectrum_report(g: GraphSample, B: NormalizedAdjacency, dec: SpectralDecomposition, target: int) -> Dict[str, Any]:
    gap = spectral_gap_statistic(dec, g.n, g.p)
    deloc = delocalization_statistic(dec, g.n, g.p)
    trace = trace_diagnostics(B, dec, g.p)
    identities = verify_spectral_identities(dec, g, target)
    return {
        "graph": graph_metadata(g),
        "eigenvalues": dec.eigenvalues,
        "residual": dec.residual,
        "degenerate": dec.degenerate,
        "gap": gap._asdict(),
        "delocalization": deloc._asdict(),
        "trace": trace._asdict(),
        "row_eigen_residual": B.row_eigen_residual(),
        "identities": {"target": target, **identities._asdict()},
    }


def hitting_report(
    g: GraphSample,
    profile: HittingProfile,
    include_column: bool = True,
) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "graph": graph_metadata(g),
        "target": profile.target_j,
        "method": profile.method,
        "H_j": profile.H_j,
        "pi_j": profile.pi_j,
    }
    if include_column and profile.H_column is not None:
        report["H_column"] = profile.H_column
    if profile.spectral_sum is not None:
        residual = abs(profile.spectral_sum - (1.0 - 2.0 * profile.pi_j + profile.Z_n))
        report["decomposition"] = {
            "spectral_sum": profile.spectral_sum,
            "pi_j": profile.pi_j,
            "Z_n": profile.Z_n,
            "residual": residual,
            "within_tolerance": residual <= DECOMPOSITION_TOLERANCE,
        }
    if profile.method == "mc":
        report["trials"] = profile.trials
        report["std_error"] = profile.std_error
    return report


def pair_report(g: GraphSample, method: str, source: int, target: int, value: Any) -> Dict[str, Any]:
    report: Dict[str, Any] = {
        "graph": graph_metadata(g),
        "source": source,
        "target": target,
        "method": method,
    }
    if isinstance(value, MonteCarloEstimate):
        report.update(H_ij=value.mean, std_error=value.std_error, trials=value.trials)
    else:
        report["H_ij"] = float(value)
    return report


def aggregates_report(H_target: np.ndarray, H_start: np.ndarray, n: int) -> Dict[str, Any]:
    return {
        "H_target": H_target,
        "H_start": H_start,
        "lln_ratio": {
            "target_max_abs_deviation": float(np.max(np.abs(H_target / n - 1.0))),
            "start_max_abs_deviation": float(np.max(np.abs(H_start / n - 1.0))),
        },
    }


def diag_graph_report(
    g: GraphSample,
    B: NormalizedAdjacency,
    dec: SpectralDecomposition,
    target: int,
    p_scale: Optional[float] = None,
) -> Dict[str, Any]:
    p = g.p if p_scale is None else p_scale
    neg = negligibility_diagnostics(dec, g, target, p=p)
    return {
        "graph": graph_metadata(g),
        "target": target,
        "p_scale": p,
        "gap": spectral_gap_statistic(dec, g.n, g.p)._asdict(),
        "delocalization": delocalization_statistic(dec, g.n, g.p)._asdict(),
        "negligibility": neg._asdict(),
        "trace": trace_diagnostics(B, dec, g.p)._asdict(),
    }


def diag_series_report(report: ExperimentReport) -> Dict[str, Any]:
    return {
        "config": report.config.to_dict(),
        "rng_id": report.rng_id,
        "series": {str(n): v for n, v in report.diagnostics.items()},
        "rejections": {str(n): v for n, v in report.rejections.items()},
        "runtime": report.runtime,
    }
