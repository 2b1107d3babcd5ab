# Sensitivity kinds
PTDF = "PTDF"
PTDF_PRIME = "PTDF_PRIME"
LODF = "LODF"

# Computation routes
METHOD_CONVENTIONAL = "conventional"
METHOD_DUAL = "dual"
METHOD_QR = "qr"
METHOD_ORACLE = "oracle"
PTDF_METHODS = [METHOD_CONVENTIONAL, METHOD_DUAL, METHOD_QR]
LODF_METHODS = [METHOD_CONVENTIONAL, METHOD_DUAL, METHOD_QR]

# Execution paths
MODE_SPARSE = "sparse"
MODE_DENSE = "dense"
MODES = [MODE_SPARSE, MODE_DENSE]

# Output formats
FORMAT_CSV = "csv"
FORMAT_JSON = "json"
FORMATS = [FORMAT_CSV, FORMAT_JSON]

# Tolerances
EQUIVALENCE_TOL = 1e-8
LODF_EQUIVALENCE_TOL = 1e-6
IDENTITY_TOL = 1e-9
RECIPROCAL_RTOL = 1e-12
BRIDGE_WARNING_TOL = 1e-6
QR_RANK_TOL = 1e-12

# Exit codes
EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERICAL = 3

# Bench defaults
DEFAULT_REPETITIONS = 20
MIN_REPETITIONS = 3
MIN_TIMER_TICKS = 10
MEDIAN_OF_MEANS_BLOCKS = 5

# Actions and object types used for logs and checkpoints
CF_BENCH = "bench"
CF_VERIFY = "verify"
CF_REPORT = "report"
BENCH_GRID_OBJECT = "grids"
BENCH_RESULT_OBJECT = "bench_results"
PIPELINE_OBJECT_TYPE = "tasks"

BENCH_CSV_COLUMNS = [
    "name",
    "nodes",
    "lines",
    "cycles",
    "cycles_per_nodes",
    "mode",
    "repetitions",
    "conventional_total_mean",
    "conventional_total_sd",
    "conventional_total_mom",
    "dual_total_mean",
    "dual_total_sd",
    "dual_total_mom",
    "speedup",
    "conventional_solve_mean",
    "conventional_solve_sd",
    "dual_solve_mean",
    "dual_solve_sd",
    "solve_speedup",
    "conventional_solve_dim",
    "dual_solve_dim",
    "conventional_nnz",
    "dual_nnz",
]

CONFIG_FILE = "~/.cycleflowcfg"
