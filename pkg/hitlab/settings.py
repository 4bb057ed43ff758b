
DEFAULT_TARGET = 0

HITTING_METHODS = [
    "spectral",  # closed form over the eigendecomposition of B
    "solve",  # first-step analysis, dense LU
    "mc",  # Monte Carlo walk simulation
]

EXPERIMENT_METHODS = [
    "auto",  # solve above SOLVE_PATH_MIN_N, spectral below
    "solve",
    "spectral",
    "both",  # cross-checked
]

STATISTIC_KINDS = [
    "target",
    "edge",
    "log",
    "diagnostics",
    "degree",
    "log_ratio",
    "lln",
]

DIAGNOSTIC_FIELDS = [
    "pi_term",
    "z_term",
    "log_sum_term",
    "lambda_sq_term",
    "z_bound",
    "gap_ratio",
    "conjecture_ratio",
    "min_participation_ratio",
]

P_RULE_KINDS = ["constant", "log"]

COUPLING_MODES = ["decreasing", "increasing"]

CONFIG_SCHEMA_VERSION = 1

# n above which the harness prefers the dense solve over a full decomposition
SOLVE_PATH_MIN_N = 500

# full H matrices are n solves; refused above this size
FULL_MATRIX_MAX_N = 500

DEFAULT_WORKERS = 1
DEFAULT_MC_TRIALS = 10_000
# recorded with clt reports; p < 1 is the only bound enforced
DEFAULT_P_BAR = 0.99
