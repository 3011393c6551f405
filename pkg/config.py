"""
Runtime configuration loaded from environment variables (and an optional .env file).
"""
import os
from dotenv import load_dotenv

# Load environment variables from .env file
load_dotenv()

VERSION = "1.0.0"


def _env_int(name: str, default: int) -> int:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return int(raw)
    except ValueError:
        raise ValueError(f"{name} must be an integer, got {raw!r}. Please check your .env file.")


def _env_float(name: str, default: float) -> float:
    raw = os.getenv(name)
    if raw is None or raw == "":
        return default
    try:
        return float(raw)
    except ValueError:
        raise ValueError(f"{name} must be a number, got {raw!r}. Please check your .env file.")


DEFAULT_SEED = _env_int("NONLOCALITY_SEED", 20240601)
DEFAULT_RESTARTS = _env_int("NONLOCALITY_RESTARTS", 20)
DEFAULT_WORKERS = _env_int("NONLOCALITY_WORKERS", 1)
DEFAULT_TOLERANCE = _env_float("NONLOCALITY_TOLERANCE", 0.0001)
LOG_LEVEL = os.getenv("NONLOCALITY_LOG_LEVEL", "INFO").upper()

# Ensembles requested over HTTP are capped; the CLI has no cap
API_MAX_SAMPLES = _env_int("NONLOCALITY_API_MAX_SAMPLES", 50)

# Experiment defaults
PURE_SAMPLES = 1000
MIXED_SAMPLES = 100
PURE_BIN_WIDTH = 0.1
MIXED_BIN_WIDTH = 0.002
CLASSICAL_BOUND = 2.0
MIXED_REFERENCE_CEILING = 0.1
