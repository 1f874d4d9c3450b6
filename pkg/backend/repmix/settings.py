"""Project configuration and helper utilities."""

from __future__ import annotations

import logging
import os
from pathlib import Path
from typing import Iterable, List

from dotenv import load_dotenv

# Load .env if it exists so local runs can redirect outputs and tune workers.
load_dotenv()

BASE_DIR = Path(__file__).resolve().parent.parent
OUT_DIR = Path(os.getenv("REPMIX_OUT_DIR", str(BASE_DIR / "build" / "runs")))
DATA_DIR = Path(os.getenv("REPMIX_DATA_DIR", str(BASE_DIR / "build" / "data")))
JOBS = int(os.getenv("REPMIX_JOBS", "1"))
PROGRESS = os.getenv("REPMIX_PROGRESS", "1").strip().lower() not in {"0", "false", "no", "off"}
LOG_LEVEL = os.getenv("REPMIX_LOG_LEVEL", "INFO").upper()
FRONTEND_ORIGIN = os.getenv("FRONTEND_ORIGIN", "*")

# MCMC protocol used throughout the synthetic and real-data experiments.
ITERATIONS = 10_000
BURN_IN = 5_000
THIN = 10

# Hyperparameter calibration.
SEPARATION_C = 4.0
CALIBRATION_MC = 10_000
MIN_CALIBRATION_MC = 1_000
TAU_START = 0.01
TAU_GROWTH = 1.5
TAU_MAX = 1e6
REJECTION_BUDGET = 1_000_000
MIN_ACCEPTANCE = 1e-4

# Model defaults.
DIRICHLET_C = 1.0
PRIOR_VAR_INFLATION = 3.0
PRIOR_SHAPE = 2.0
WEIGHT_TOL = 1e-12
VARIANCE_FLOOR = 1e-6
INIT_JITTER = 1e-3
INIT_ATTEMPTS = 100

# Slice-sampler draws from the prior when rejection is hopeless.
PRIOR_CHAIN_BURN_IN = 500
PRIOR_CHAIN_THIN = 2

# Truncated sampling.
CDF_TOL = 1e-12
MIN_SLICE_MASS = 1e-300

# Post-processing.
RELABEL_MAX_SWEEPS = 100
RELABEL_TOL = 1e-10
KL_BOX_SD = 8.0
KL_NODES_1D = 2048
KL_NODES_2D = 256
KL_RTOL = 1e-6
DENSITY_FLOOR = 1e-300

# Experiment suites.
REPLICATES = 10


def ensure_directories(paths: Iterable[Path] | None = None) -> List[Path]:
    """Ensure all required build directories exist and return them."""

    targets = list(paths) if paths is not None else [OUT_DIR, DATA_DIR]
    for path in targets:
        path.mkdir(parents=True, exist_ok=True)
    return targets


def configure_logging(level: str | None = None) -> None:
    logging.basicConfig(
        level=(level or LOG_LEVEL),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


__all__ = [
    "BASE_DIR",
    "OUT_DIR",
    "DATA_DIR",
    "JOBS",
    "PROGRESS",
    "LOG_LEVEL",
    "FRONTEND_ORIGIN",
    "ensure_directories",
    "configure_logging",
]
