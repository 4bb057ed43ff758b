"""
Numeric tolerances and thresholds
"""

# Stationary distribution
PI_SUM_TOLERANCE = 1e-12

# Eigendecomposition acceptance (residual is scaled by n)
RESIDUAL_TOLERANCE_PER_N = 1e-9
ORTHONORMALITY_TOLERANCE = 1e-9
TOP_EIGENVALUE_TOLERANCE = 1e-10
DEGENERACY_TOLERANCE = 1e-12
# Projected basis vectors shorter than this are skipped when canonicalizing an eigenspace
CANONICAL_PROJECTION_TOLERANCE = 1e-6

# Refuse hitting-time work when 1 - lambda_2 falls below this
NEAR_DISCONNECTED_GAP = 1e-8

# S_j = 1 - 2 pi_j + Z_n check and spectral vs solve agreement
DECOMPOSITION_TOLERANCE = 1e-9
CROSS_METHOD_RELATIVE_TOLERANCE = 1e-8

# Nontrivial spectrum of B stays within 2 / sqrt(np)
SPECTRAL_GAP_ENVELOPE = 2.0

# Z_n upper bound holds once every nontrivial eigenvalue is at most this
Z_BOUND_EIGENVALUE_LIMIT = 0.5

# Monte Carlo
MC_STEP_CAP = 10**9
MC_CHUNK_TRIALS = 4096

# Experiment runner
MAX_RESAMPLE_ATTEMPTS = 100
MAX_REJECTION_FRACTION = 0.5

# Progress update frequency (update every N% instead of every task)
PROGRESS_UPDATE_INTERVAL_PERCENT = 1

# Eigenvector CSV dumps above this many entries get a size warning
EIGENVECTOR_DUMP_WARN_ENTRIES = 1_000_000
