from .rng import RNG_ID, derive_seed, make_generator
from .graph_model import (
    CoupledSequenceState,
    GraphSample,
    GraphStatistics,
    StationaryDistribution,
    advance_coupled_sequence,
    graph_statistics,
    is_connected,
    sample_er_graph,
    start_coupled_sequence,
    stationary_distribution,
)
from .spectral import (
    NormalizedAdjacency,
    SpectralDecomposition,
    build_normalized_adjacency,
    canonical_eigenspace_basis,
    delocalization_statistic,
    eigendecompose,
    normalized_laplacian_spectrum,
    require_spectral_gap,
    spectral_gap_statistic,
    trace_diagnostics,
    verify_spectral_identities,
)
from .hitting import (
    HittingProfile,
    hitting_matrix_solve,
    hitting_matrix_spectral,
    hitting_time_mc,
    hitting_time_solve,
    hitting_time_spectral,
    hitting_times_solve,
    mean_hitting_aggregates,
    mean_target_hitting_mc,
    mean_target_hitting_solve,
    mean_target_hitting_spectral,
    sum_decomposition,
)
from .clt_harness import (
    ExperimentConfig,
    ExperimentReport,
    PRule,
    StandardizedSample,
    delta_inputs,
    negligibility_diagnostics,
    run_experiment,
    standardized_degree_statistic,
    standardized_edge_statistic,
    standardized_log_ratio_statistic,
    standardized_log_statistic,
    standardized_target_statistic,
    summary_stats,
)
