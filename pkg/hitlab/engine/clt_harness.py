from __future__ import annotations
from concurrent.futures import ProcessPoolExecutor, as_completed
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
import logging
import math
import platform
import time
import warnings
from typing import Any, Callable, Dict, List, NamedTuple, Optional, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from .graph_model import GraphSample, graph_statistics, is_connected, sample_er_graph
from .hitting import mean_target_hitting_solve, mean_target_hitting_spectral, sum_decomposition
from .rng import RNG_ID, derive_seed
from .spectral import (
    SpectralDecomposition,
    build_normalized_adjacency,
    delocalization_statistic,
    eigendecompose,
    spectral_gap_statistic,
)
from ..constants import (
    CROSS_METHOD_RELATIVE_TOLERANCE,
    MAX_REJECTION_FRACTION,
    MAX_RESAMPLE_ATTEMPTS,
    PROGRESS_UPDATE_INTERVAL_PERCENT,
    Z_BOUND_EIGENVALUE_LIMIT,
)
from ..errors import (
    ConfigError,
    CrossMethodMismatch,
    InsufficientSamples,
    InvalidProbability,
    InvalidSize,
    IsolatedTarget,
    TooManyRejections,
)
from ..settings import (
    CONFIG_SCHEMA_VERSION,
    DEFAULT_TARGET,
    DEFAULT_WORKERS,
    DIAGNOSTIC_FIELDS,
    EXPERIMENT_METHODS,
    P_RULE_KINDS,
    SOLVE_PATH_MIN_N,
    STATISTIC_KINDS,
)

logger = logging.getLogger(__name__)

SAMPLE_COLUMNS = ["n", "p", "rep", "statistic", "value"]


@dataclass(frozen=True)
class PRule:
    """Edge probability as a function of n: constant p, or c log(n) / n."""
    kind: str
    p: Optional[float] = None
    c: Optional[float] = None

    def __post_init__(self):
        if self.kind not in P_RULE_KINDS:
            raise ConfigError(f"p_rule kind must be one of {P_RULE_KINDS}, got {self.kind!r}")
        if self.kind == "constant" and (self.p is None or self.c is not None):
            raise ConfigError("constant p_rule needs exactly the field 'p'")
        if self.kind == "log":
            if self.c is None or self.p is not None:
                raise ConfigError("log p_rule needs exactly the field 'c'")
            if self.c < 2:
                raise ConfigError(f"log p_rule constant must be >= 2, got {self.c}")

    def realized_p(self, n: int) -> float:
        if self.kind == "constant":
            return float(self.p)
        return float(self.c * math.log(n) / n)

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "PRule":
        if not isinstance(d, dict):
            raise ConfigError(f"p_rule must be an object, got {d!r}")
        unknown = set(d) - {"kind", "p", "c"}
        if unknown:
            raise ConfigError(f"unknown p_rule fields: {sorted(unknown)}")
        return cls(kind=d.get("kind"), p=d.get("p"), c=d.get("c"))

    def to_dict(self) -> Dict[str, Any]:
        if self.kind == "constant":
            return {"kind": "constant", "p": self.p}
        return {"kind": "log", "c": self.c}


@dataclass(frozen=True)
class ExperimentConfig:
    n_grid: Tuple[int, ...]
    p_rule: PRule
    replications: int
    master_seed: int
    target: int = DEFAULT_TARGET
    method: str = "auto"
    statistics: Tuple[str, ...] = ("target",)
    workers: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(int(n) for n in self.n_grid))
        object.__setattr__(self, "statistics", tuple(self.statistics))
        self.validate()

    def validate(self) -> None:
        if not self.n_grid:
            raise ConfigError("n_grid must not be empty")
        if self.replications < 1:
            raise ConfigError(f"replications must be >= 1, got {self.replications}")
        if self.master_seed < 0:
            raise ConfigError(f"master_seed must be non-negative, got {self.master_seed}")
        if self.method not in EXPERIMENT_METHODS:
            raise ConfigError(f"method must be one of {EXPERIMENT_METHODS}, got {self.method!r}")
        unknown = [s for s in self.statistics if s not in STATISTIC_KINDS]
        if unknown or not self.statistics:
            raise ConfigError(f"statistics must be a non-empty subset of {STATISTIC_KINDS}, got {list(self.statistics)}")
        if self.workers is not None and self.workers < 1:
            raise ConfigError(f"workers must be >= 1, got {self.workers}")
        for n in self.n_grid:
            if n < 3:
                raise ConfigError(f"every n must be >= 3, got {n}")
            if not (0 <= self.target < n):
                raise ConfigError(f"target {self.target} outside 0..{n - 1}")
            p = self.p_rule.realized_p(n)
            if not (0.0 < p < 1.0):
                raise ConfigError(f"p_rule gives p={p} at n={n}; must lie in (0, 1)")

    @classmethod
    def from_dict(cls, d: Dict[str, Any]) -> "ExperimentConfig":
        if not isinstance(d, dict):
            raise ConfigError("experiment config must be a JSON object")
        d = dict(d)
        schema = d.pop("schema", None)
        if schema != CONFIG_SCHEMA_VERSION:
            raise ConfigError(f"unsupported config schema {schema!r}, expected {CONFIG_SCHEMA_VERSION}")
        allowed = {"n_grid", "p_rule", "target", "replications", "master_seed", "method", "statistics", "workers"}
        unknown = set(d) - allowed
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        missing = {"n_grid", "p_rule", "replications", "master_seed"} - set(d)
        if missing:
            raise ConfigError(f"missing config fields: {sorted(missing)}")
        try:
            return cls(
                n_grid=tuple(d["n_grid"]),
                p_rule=PRule.from_dict(d["p_rule"]),
                replications=int(d["replications"]),
                master_seed=int(d["master_seed"]),
                target=int(d.get("target", DEFAULT_TARGET)),
                method=d.get("method", "auto"),
                statistics=tuple(d.get("statistics", ("target",))),
                workers=d.get("workers"),
            )
        except (TypeError, ValueError) as e:
            if isinstance(e, ConfigError):
                raise
            raise ConfigError(f"malformed experiment config: {e}") from e

    def to_dict(self) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "schema": CONFIG_SCHEMA_VERSION,
            "n_grid": list(self.n_grid),
            "p_rule": self.p_rule.to_dict(),
            "target": self.target,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "method": self.method,
            "statistics": list(self.statistics),
        }
        if self.workers is not None:
            d["workers"] = self.workers
        return d


class DeltaInputs(NamedTuple):
    r_n: float
    T_n: Tuple[float, float]
    theta_n: Tuple[float, float]


class NegligibilityDiagnostics(NamedTuple):
    pi_term: float
    z_term: float
    log_sum_term: float
    lambda_sq_term: float
    z_bound: float
    z_bound_applicable: bool


def _check_open_p(p: float) -> float:
    if not (0.0 < p < 1.0):
        raise InvalidProbability(f"p must lie in (0, 1), got {p}")
    return float(p)


def _check_min_n(n: int, minimum: int) -> None:
    if n < minimum:
        raise InvalidSize(f"n must be >= {minimum}, got {n}")


def standardized_target_statistic(H_j: float, n: int, p: float) -> float:
    p = _check_open_p(p)
    _check_min_n(n, 2)
    return math.sqrt(p / (n * (1.0 - p))) * (H_j - n)


def edge_statistic_from_count(excluded: int, n: int, p: float) -> float:
    p = _check_open_p(p)
    _check_min_n(n, 3)
    m = math.comb(n - 1, 2)
    return math.sqrt(m / (p * (1.0 - p))) * (excluded / m - p)


def standardized_edge_statistic(g: GraphSample, j: int) -> float:
    stats_j = graph_statistics(g, j)
    return edge_statistic_from_count(stats_j.excluded_edge_count, g.n, g.p)


def degree_statistic_from_count(degree: int, n: int, p: float) -> float:
    p = _check_open_p(p)
    _check_min_n(n, 2)
    return (degree - (n - 1) * p) / math.sqrt((n - 1) * p * (1.0 - p))


def standardized_degree_statistic(g: GraphSample, j: int) -> float:
    stats_j = graph_statistics(g, j)
    return degree_statistic_from_count(stats_j.degree_j, g.n, g.p)


def log_statistic_from_counts(excluded: int, degree: int, n: int, p: float) -> float:
    p = _check_open_p(p)
    if degree < 1:
        raise IsolatedTarget("target vertex has degree 0")
    return math.sqrt(n * p / (1.0 - p)) * (math.log(2 * excluded / degree + 2) - math.log(n))


def standardized_log_statistic(g: GraphSample, j: int) -> float:
    stats_j = graph_statistics(g, j)
    return log_statistic_from_counts(stats_j.excluded_edge_count, stats_j.degree_j, g.n, g.p)


def standardized_log_ratio_statistic(g: GraphSample, j: int) -> float:
    """The intermediate delta-method step, before the +2 shift."""
    p = _check_open_p(g.p)
    _check_min_n(g.n, 3)
    stats_j = graph_statistics(g, j)
    if stats_j.degree_j < 1:
        raise IsolatedTarget(f"target vertex {j} has degree 0")
    if stats_j.excluded_edge_count < 1:
        raise InvalidSize(f"no edges outside the neighbourhood of vertex {j}")
    ratio = 2 * stats_j.excluded_edge_count / stats_j.degree_j
    return math.sqrt((g.n - 1) * p / (1.0 - p)) * (math.log(ratio) - math.log(g.n - 2))


def delta_inputs(g: GraphSample, j: int) -> DeltaInputs:
    n = g.n
    p = _check_open_p(g.p)
    _check_min_n(n, 3)
    stats_j = graph_statistics(g, j)
    m = math.comb(n - 1, 2)
    return DeltaInputs(
        r_n=math.sqrt((n - 1) * p / (1.0 - p)),
        T_n=(
            stats_j.excluded_edge_count / math.sqrt(m * (n - 1) * p ** 2),
            stats_j.degree_j / ((n - 1) * p),
        ),
        theta_n=(math.sqrt((n - 2) / 2), 1.0),
    )


def negligibility_diagnostics(
    dec: SpectralDecomposition, g: GraphSample, j: int, p: Optional[float] = None
) -> NegligibilityDiagnostics:
    """
    Terms that must vanish on the CLT scale sqrt(np / (1 - p)).

    ``p`` overrides the graph's own p for the scaling (needed for p = 1 graphs).
    """
    p = _check_open_p(g.p if p is None else p)
    terms = sum_decomposition(dec, g, j)
    scale = math.sqrt(g.n * p / (1.0 - p))
    lam = dec.eigenvalues
    nontrivial_sq = float(np.dot(lam[1:], lam[1:]))
    max_inf_sq = float(np.max(np.abs(dec.eigenvectors[:, 1:])) ** 2)
    return NegligibilityDiagnostics(
        pi_term=scale * terms.pi_j,
        z_term=scale * terms.Z_n,
        log_sum_term=scale * math.log(terms.spectral_sum),
        lambda_sq_term=p * nontrivial_sq,
        z_bound=2.0 * max_inf_sq * nontrivial_sq,
        z_bound_applicable=bool(np.all(lam[1:] <= Z_BOUND_EIGENVALUE_LIMIT)),
    )


class SummaryStats(NamedTuple):
    count: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float


def summary_stats(samples, require_variance: bool = False) -> SummaryStats:
    """
    Mean, unbiased variance, skewness, excess kurtosis and the KS distance
    sup_x |F_emp(x) - Phi(x)| to the standard normal.

    Variance needs two samples: with ``require_variance`` a single sample
    raises InsufficientSamples, otherwise the variance is NaN. Skewness and
    kurtosis are NaN below three samples.
    """
    x = np.asarray(list(samples), dtype=float)
    if len(x) < 1:
        raise InsufficientSamples("summary needs at least one sample")
    if require_variance and len(x) < 2:
        raise InsufficientSamples(f"variance needs at least two samples, got {len(x)}")
    variance = float(x.var(ddof=1)) if len(x) >= 2 else math.nan
    skewness = excess_kurtosis = math.nan
    if len(x) >= 3:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            skewness = float(stats.skew(x))
            excess_kurtosis = float(stats.kurtosis(x, fisher=True))
    ks = float(stats.kstest(x, "norm").statistic)
    return SummaryStats(len(x), float(x.mean()), variance, skewness, excess_kurtosis, ks)


@dataclass(frozen=True)
class StandardizedSample:
    n: int
    p: float
    rep: int
    statistic: str
    value: float


@dataclass(frozen=True)
class StatisticSummary:
    n: int
    p: float
    statistic: str
    count: int
    rejected: int
    mean: float
    variance: float
    skewness: float
    excess_kurtosis: float
    ks_distance: float


@dataclass(frozen=True)
class ReplicationResult:
    n: int
    rep: int
    seed: int
    rejections: int
    values: Dict[str, float]


@dataclass(frozen=True, eq=False)
class ExperimentReport:
    config: ExperimentConfig
    samples: Tuple[StandardizedSample, ...]
    summaries: Tuple[StatisticSummary, ...]
    diagnostics: Dict[int, Dict[str, Dict[str, float]]]
    rejections: Dict[int, int]
    runtime: Dict[str, Any] = field(default_factory=dict)
    rng_id: str = RNG_ID

    def samples_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(s) for s in self.samples], columns=SAMPLE_COLUMNS)

    def summary_frame(self) -> pd.DataFrame:
        return pd.DataFrame([asdict(s) for s in self.summaries])

    def to_dict(self, include_runtime: bool = True) -> Dict[str, Any]:
        d: Dict[str, Any] = {
            "config": self.config.to_dict(),
            "rng_id": self.rng_id,
            "summaries": [asdict(s) for s in self.summaries],
            "diagnostics": {str(n): v for n, v in self.diagnostics.items()},
            "rejections": {str(n): v for n, v in self.rejections.items()},
        }
        if include_runtime:
            d["runtime"] = dict(self.runtime)
        return d


def resolve_method(method: str, n: int) -> str:
    if method == "auto":
        return "solve" if n > SOLVE_PATH_MIN_N else "spectral"
    return method


def _target_hitting(cfg: ExperimentConfig, g: GraphSample, dec: Optional[SpectralDecomposition]) -> float:
    method = resolve_method(cfg.method, g.n)
    if method == "solve":
        return mean_target_hitting_solve(g, cfg.target).H_j
    spectral = mean_target_hitting_spectral(dec, g, cfg.target).H_j
    if method == "both":
        solved = mean_target_hitting_solve(g, cfg.target).H_j
        if abs(spectral - solved) > CROSS_METHOD_RELATIVE_TOLERANCE * abs(solved):
            raise CrossMethodMismatch(
                f"H_{cfg.target} spectral={spectral!r} solve={solved!r} at n={g.n}, seed={g.seed}"
            )
        return solved
    return spectral


def _needs_decomposition(cfg: ExperimentConfig, n: int) -> bool:
    if "diagnostics" in cfg.statistics:
        return True
    wants_hitting = "target" in cfg.statistics or "lln" in cfg.statistics
    return wants_hitting and resolve_method(cfg.method, n) != "solve"


def compute_statistics(cfg: ExperimentConfig, g: GraphSample) -> Dict[str, float]:
    """All requested statistics for one connected sample, keyed by statistic name."""
    j = cfg.target
    values: Dict[str, float] = {}
    dec = None
    if _needs_decomposition(cfg, g.n):
        dec = eigendecompose(build_normalized_adjacency(g))

    if "target" in cfg.statistics or "lln" in cfg.statistics:
        H_j = _target_hitting(cfg, g, dec)
        if "target" in cfg.statistics:
            values["target"] = standardized_target_statistic(H_j, g.n, g.p)
        if "lln" in cfg.statistics:
            values["lln"] = H_j / g.n
    if "edge" in cfg.statistics:
        values["edge"] = standardized_edge_statistic(g, j)
    if "log" in cfg.statistics:
        values["log"] = standardized_log_statistic(g, j)
    if "degree" in cfg.statistics:
        values["degree"] = standardized_degree_statistic(g, j)
    if "log_ratio" in cfg.statistics:
        values["log_ratio"] = standardized_log_ratio_statistic(g, j)
    if "diagnostics" in cfg.statistics:
        neg = negligibility_diagnostics(dec, g, j)
        gap = spectral_gap_statistic(dec, g.n, g.p)
        deloc = delocalization_statistic(dec, g.n, g.p)
        values.update(
            pi_term=neg.pi_term,
            z_term=neg.z_term,
            log_sum_term=neg.log_sum_term,
            lambda_sq_term=neg.lambda_sq_term,
            z_bound=neg.z_bound,
            gap_ratio=gap.normalized_ratio,
            conjecture_ratio=deloc.conjecture_ratio,
            min_participation_ratio=deloc.min_participation_ratio,
        )
    return values


def run_replication(cfg: ExperimentConfig, n: int, rep: int) -> ReplicationResult:
    """
    One replication at size n. Disconnected samples are rejected and redrawn
    from derive_seed(master_seed, n, rep, attempt) with the next attempt index.
    """
    p = cfg.p_rule.realized_p(n)
    for attempt in range(MAX_RESAMPLE_ATTEMPTS):
        seed = derive_seed(cfg.master_seed, n, rep, attempt)
        g = sample_er_graph(n, p, seed)
        if is_connected(g):
            return ReplicationResult(n=n, rep=rep, seed=seed, rejections=attempt, values=compute_statistics(cfg, g))
        logger.debug(f"Rejected disconnected sample n={n} rep={rep} attempt={attempt}")
    raise TooManyRejections(
        f"replication {rep} at n={n}, p={p:.4g}: {MAX_RESAMPLE_ATTEMPTS} consecutive disconnected samples"
    )


def _median_series(samples: List[StandardizedSample]) -> Dict[int, Dict[str, Dict[str, float]]]:
    series: Dict[int, Dict[str, Dict[str, float]]] = {}
    for n in sorted({s.n for s in samples}):
        per_n: Dict[str, Dict[str, float]] = {}
        for name in DIAGNOSTIC_FIELDS:
            vals = np.array([s.value for s in samples if s.n == n and s.statistic == name])
            if len(vals):
                per_n[name] = {
                    "median": float(np.median(vals)),
                    "median_abs": float(np.median(np.abs(vals))),
                }
        if per_n:
            series[n] = per_n
    return series


def _summarize(
    cfg: ExperimentConfig, samples: List[StandardizedSample], rejections: Dict[int, int]
) -> List[StatisticSummary]:
    summaries = []
    for n in cfg.n_grid:
        for name in cfg.statistics:
            if name == "diagnostics":
                continue
            vals = [s.value for s in samples if s.n == n and s.statistic == name]
            st = summary_stats(vals)
            summaries.append(
                StatisticSummary(
                    n=n,
                    p=cfg.p_rule.realized_p(n),
                    statistic=name,
                    count=st.count,
                    rejected=rejections[n],
                    mean=st.mean,
                    variance=st.variance,
                    skewness=st.skewness,
                    excess_kurtosis=st.excess_kurtosis,
                    ks_distance=st.ks_distance,
                )
            )
    return summaries


def run_experiment(
    cfg: ExperimentConfig,
    workers: Optional[int] = None,
    progress_cb: Optional[Callable[[int], None]] = None,
) -> ExperimentReport:
    """
    Run every (n, replication) task and aggregate.

    Tasks are independent; with more than one worker they run in a process
    pool. Results are keyed by (n, rep) and sorted before aggregation, so the
    report does not depend on the schedule.
    """
    workers = workers or cfg.workers or DEFAULT_WORKERS
    tasks = [(n, rep) for n in cfg.n_grid for rep in range(cfg.replications)]
    total = len(tasks)
    step = max(1, total // (100 // PROGRESS_UPDATE_INTERVAL_PERCENT))
    started = time.perf_counter()
    started_at = datetime.now(timezone.utc).isoformat()
    logger.info(f"Running {total} replications over n_grid={list(cfg.n_grid)} with {workers} worker(s)")

    results: Dict[Tuple[int, int], ReplicationResult] = {}

    def _done(res: ReplicationResult) -> None:
        results[(res.n, res.rep)] = res
        done = len(results)
        if progress_cb is not None and (done % step == 0 or done == total):
            progress_cb(int(done * 100 / total))

    if workers == 1:
        for n, rep in tasks:
            _done(run_replication(cfg, n, rep))
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            futures = [pool.submit(run_replication, cfg, n, rep) for n, rep in tasks]
            for fut in as_completed(futures):
                _done(fut.result())

    rejections = {n: 0 for n in cfg.n_grid}
    samples: List[StandardizedSample] = []
    for key in sorted(results):
        res = results[key]
        rejections[res.n] += res.rejections
        p = cfg.p_rule.realized_p(res.n)
        for name, value in res.values.items():
            samples.append(StandardizedSample(n=res.n, p=p, rep=res.rep, statistic=name, value=float(value)))

    for n, rejected in rejections.items():
        if rejected > MAX_REJECTION_FRACTION * (cfg.replications + rejected):
            raise TooManyRejections(
                f"{rejected} of {cfg.replications + rejected} samples at n={n} were disconnected; "
                f"p={cfg.p_rule.realized_p(n):.4g} is below the connectivity regime"
            )
        if rejected:
            logger.warning(f"Rejected {rejected} disconnected sample(s) at n={n}")

    elapsed = time.perf_counter() - started
    logger.info(f"Experiment finished in {elapsed:.1f}s")
    return ExperimentReport(
        config=cfg,
        samples=tuple(samples),
        summaries=tuple(_summarize(cfg, samples, rejections)),
        diagnostics=_median_series(samples),
        rejections=rejections,
        runtime={
            "started_at": started_at,
            "elapsed_seconds": elapsed,
            "workers": workers,
            "python": platform.python_version(),
            "numpy": np.__version__,
        },
    )
