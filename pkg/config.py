import logging
import os
import sys

logger = logging.getLogger(__name__)

# Machine epsilon for IEEE double precision
EPS = sys.float_info.epsilon

# Methods
METHODS = ["newton", "halley", "hnr1", "hnr2"]
DEFAULT_METHOD = "hnr2"  # used for every numerical test in the reference experiments

# Kernel settings
EXP_OVERFLOW_T = 709.0  # largest t for which e^t is safely representable
TINY_T = 1e-300  # below this |t|, E(t) is returned as exactly 1

# Solver defaults
F_TOL_SCALE = 1e-13  # f_tol = F_TOL_SCALE * max(1, |f(x0)|)
X_TOL = 4 * EPS  # relative step threshold
MAX_ITER = 200
CYCLE_WINDOW = 4  # longest period checked (0..8)
CYCLE_TOL = 1e-9  # relative tolerance for cycle recurrence
DIVERGENCE_BOUND = 1e308 / 4

# Basin analysis settings
BASIN_MAX_ITER = 100
ROOT_MATCH_TOL = 1e-6  # relative tolerance when matching a found root to a known root
ORDER_ERROR_FLOOR = 1e2 * EPS  # errors below this are too noisy for order estimation

# Expression parser
MAX_EXPR_DEPTH = 100  # deepest nesting accepted by the parser
SUGGESTION_MIN_SCORE = 60  # fuzzy match score needed for a "did you mean"

# Output settings
SCHEMA_VERSION = "1.0"
CSV_FLOAT_FORMAT = ".17g"
TRACE_CSV_COLUMNS = ["iter", "x", "f", "fprime", "fsecond", "q", "multiplier", "step"]
SWEEP_CSV_COLUMNS = ["x0", "status", "root", "iterations", "max_excursion"]

# Web server
HOST = "127.0.0.1"
PORT = 8000
MAX_SWEEP_POINTS = 100_000  # largest grid accepted over HTTP

# Debug mode (set ROOTKIT_DEBUG=1 for more verbose output)
DEBUG = os.environ.get("ROOTKIT_DEBUG", "") == "1"


def _read_threads() -> int:
    """Sweep worker count from ROOTKIT_THREADS, clamped to 1-64."""
    raw = os.environ.get("ROOTKIT_THREADS")
    if not raw:
        return 1
    try:
        value = int(raw)
    except ValueError:
        logger.warning(f"Ignoring invalid ROOTKIT_THREADS={raw!r}, using 1 thread")
        return 1
    return max(1, min(64, value))


SWEEP_THREADS = _read_threads()
