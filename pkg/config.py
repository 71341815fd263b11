import os
from dotenv import load_dotenv


load_dotenv()

__version__ = "0.3.0"

LOG_LEVEL = os.getenv("CASCADE_BRANCH_LOG_LEVEL", "INFO").upper()

# Caps the worker threads used for grid evaluation in the estimator
THREADS = max(1, int(os.getenv("CASCADE_BRANCH_THREADS", os.cpu_count() or 1)))

DEFAULT_OUTPUT_DIR = os.getenv("CASCADE_BRANCH_OUTPUT_DIR", "out")
DEFAULT_PERIOD = os.getenv("CASCADE_BRANCH_PERIOD", "1d")
DEFAULT_WINDOW = int(os.getenv("CASCADE_BRANCH_WINDOW", 3))

# Branching-model projection
DEFAULT_HORIZON = int(os.getenv("CASCADE_BRANCH_HORIZON", 200))
DEFAULT_EPS = float(os.getenv("CASCADE_BRANCH_EPS", 0.5))
MAX_HORIZON = 10_000

# Estimator grid
R0_MIN = 0.0
R0_MAX = float(os.getenv("CASCADE_BRANCH_R0_MAX", 30.0))
R0_STEPS = 301
N_MAX = float(os.getenv("CASCADE_BRANCH_N_MAX", 1e6))
N_STEPS = 200
REFINE_ROUNDS = 5
REFINE_SHRINK = 0.2

# Simulator defaults
SIM_MEAN_DELAY = float(os.getenv("CASCADE_BRANCH_MEAN_DELAY", 3600.0))
SIM_MAX_GENERATIONS = 100
SIM_LAMBDA = float(os.getenv("CASCADE_BRANCH_SIM_LAMBDA", 0.0))
SIM_POPULATION = int(os.getenv("CASCADE_BRANCH_SIM_POPULATION", 1000))
