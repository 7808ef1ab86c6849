import os
from dotenv import load_dotenv

load_dotenv()


def _float(name: str, default: float) -> float:
    return float(os.getenv(name, str(default)))


def _int(name: str, default: int) -> int:
    return int(os.getenv(name, str(default)))


LOG_FILE = os.getenv("CROSSROADS_LOG_FILE", "data/crossroads.log")
LOG_LEVEL = os.getenv("CROSSROADS_LOG_LEVEL", "INFO").upper()

# Thread-pool width for per-cluster classification and independent sweeps
WORKERS = _int("CROSSROADS_WORKERS", os.cpu_count() or 4)

# Operator identities
COMMUTATOR_TOL = _float("CROSSROADS_COMMUTATOR_TOL", 1e-10)

# Discriminant reconstruction
TRIM_TOL = _float("CROSSROADS_TRIM_TOL", 1e-9)
ILLCOND_TOL = _float("CROSSROADS_ILLCOND_TOL", 1e-6)
NEWTON_TOL = _float("CROSSROADS_NEWTON_TOL", 1e-12)
NEWTON_MAX_ITER = _int("CROSSROADS_NEWTON_MAX_ITER", 50)

# Clustering and classification
CLUSTER_TOL = _float("CROSSROADS_CLUSTER_TOL", 1e-5)
EIGENSPACE_TOL = _float("CROSSROADS_EIGENSPACE_TOL", 1e-4)
Q_CROSSING_GAP = _float("CROSSROADS_Q_CROSSING_GAP", 1e-3)
Q_COALESCE_GAP = _float("CROSSROADS_Q_COALESCE_GAP", 1e-4)
MONODROMY_STEPS = _int("CROSSROADS_MONODROMY_STEPS", 128)
MONODROMY_RADIUS = _float("CROSSROADS_MONODROMY_RADIUS", 0.2)

# Continuation
ESCAPE_RADIUS = _float("CROSSROADS_ESCAPE_RADIUS", 1e3)
MAX_DISPLACEMENT = _float("CROSSROADS_MAX_DISPLACEMENT", 0.1)
MIN_STEP = _float("CROSSROADS_MIN_STEP", 1e-6)
INITIAL_STEP = _float("CROSSROADS_INITIAL_STEP", 0.02)
