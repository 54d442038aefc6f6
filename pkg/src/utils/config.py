"""
Configuration module for the simulator.
Centralizes environment variables and constants.
"""

import os
from dotenv import load_dotenv

load_dotenv()

# ==============================================================================
# Backends
# ==============================================================================
# 2^20 complex amplitudes is the largest dense state we build
DENSE_QUBIT_LIMIT = int(os.environ.get("MQKD_DENSE_QUBIT_LIMIT", "20"))
DENSITY_QUBIT_LIMIT = 12
NUMERICAL_TOLERANCE = 1e-10

# ==============================================================================
# Codes
# ==============================================================================
# Above this dimension the minimum distance must be declared instead of enumerated
MAX_ENUMERATION_DIMENSION = 20
DEFAULT_CSS_CODE = "steane"

# ==============================================================================
# Protocol defaults
# ==============================================================================
DEFAULT_CONFIDENCE = 0.01
DEFAULT_QUESTIONS = 10

# ==============================================================================
# Harness
# ==============================================================================
MASTER_SEED_ENV = "MQKD_MASTER_SEED"
DEFAULT_MASTER_SEED = 20240101
DEFAULT_WORKERS = int(os.environ.get("MQKD_WORKERS", "-1"))


def master_seed_override() -> int | None:
    """Return the master seed from the environment, if one is set."""
    value = os.environ.get(MASTER_SEED_ENV)
    if value is None or value.strip() == "":
        return None
    return int(value)
