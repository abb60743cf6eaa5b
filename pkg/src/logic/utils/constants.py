"""Constants and Configuration for the Floquet Laboratory."""

# Linear Algebra Tolerances
HERMITICITY_TOLERANCE = 1e-12  # Relative Frobenius defect ||M - M^dag|| / ||M||
UNITARITY_TOLERANCE = 1e-10  # Frobenius defect ||U^dag U - Id||
EIGENSYSTEM_TOLERANCE = 1e-10  # Orthonormality and reconstruction defect
SINGULAR_VALUE_FLOOR = 1e-14  # Smallest singular value accepted by polar_unitarize
PHASE_CLUSTER_GAP = 1e-9  # Eigenphases closer than this form one cluster
PHASE_MIXING_WEIGHT = 0.6180339887498949  # Weight of (U - U^dag)/2i in the Hermitian embedding

# Propagation
NORM_DRIFT_LIMIT = 1e-6  # NormDriftExceeded above this drift
ORBIT_ACCEPT_DRIFT = 1e-8  # OrbitSample.accepted threshold
RENORMALIZE_EVERY = 100  # Polar re-unitarization period (steps)
DEFAULT_STEPS_PER_PERIOD = 2000  # Step count used when only a period is given
EIGENVECTOR_RESIDUAL = 1e-8  # NotAnEigenvector above this residual
GRID_TIME_RTOL = 1e-6  # Time lookup tolerance, in units of the grid step

# Quasienergy Operator
QUADRATURE_FACTOR = 8  # Q = 8N samples per period by default
EDGE_FRACTION = 0.5  # Eigenvectors centred beyond this fraction of N are cutoff artifacts
EXPANSION_RESIDUAL = 1e-6  # ExpansionResidualTooLarge above this residual
MIN_MODE_SAMPLES = 64  # mode_regularity needs at least this many samples per period
MODE_STABILITY_RATIO = 0.1  # Allowed relative change under 2x refinement
CONVERGENCE_FLOOR = 1e-11  # Mismatches below this count as converged
MATCH_TOLERANCE = 1e-6  # Correspondence pairs farther apart are reported unmatched

# Orbit Diagnostics
TAIL_TO_ZERO = 0.1  # beta(E_max) below this -> "to-zero"
TAIL_TO_ONE = 0.9  # beta(E_max) above this -> "to-one"
GRID_JUMP_FRACTION = 0.25  # h * ||H|| * ||psi|| must stay below this fraction of eps
RAGE_DECREASE_RTOL = 1e-9  # a(tau) must drop by more than this relative amount to count

# Stability Verdicts
STABILITY_GROWTH_EXPONENT = 0.1  # gamma above this counts as growth
STABILITY_SUP_RATIO = 1.05  # sup(last decade) <= ratio * sup(previous decade)
STABILITY_FIT_R2 = 0.9  # Minimum R^2 of the log-log fit for a growth verdict
STABILITY_MIN_DECADES = 2.0  # Series must span this many decades of t

# Enlarged Space
MAX_ENLARGED_DIM = 4096  # DimensionTooLarge above q*d
SUMMABILITY_TAIL_RATIO = 1e-3  # (S_2k - S_k) / S_2k below this -> convergent
HISTOGRAM_BINS = 16  # Eigenphase histogram bins for the convergent sweep

# Logging
LOG_LEVEL = "INFO"
LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"
LOG_FILE = None  # Set FLOQUET_LAB_LOG_FILE to enable the rotating file handler
LOG_MAX_BYTES = 10 * 1024 * 1024  # 10 MB
LOG_BACKUP_COUNT = 7

# Artifacts
CSV_FLOAT_FORMAT = "%.17g"  # 17 significant digits: bit-faithful round trip
REPORT_SUFFIX = ".report.json"
JSON_INDENT = 2

# Valid Values
STABILITY_VERDICT_VALUES = {"bounded-consistent", "growth", "indeterminate"}
AP_VERDICT_VALUES = {"AP-consistent", "violating-witness"}
TAIL_TREND_VALUES = {"to-zero", "to-one", "indeterminate"}
SUMMABILITY_TREND_VALUES = {"finite", "convergent", "divergent"}
PRESET_NAMES = ("af-identity", "lemma47", "prop32", "prop44", "qp-witness", "rage-lattice")
