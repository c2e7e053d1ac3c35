"""
Runtime configuration.

Environment Variables:
    - BELL_THREADS: joblib worker count for shard enumeration and multi-start
      optimisation (default: 1, "-1" uses every core)
    - BELL_LOG_LEVEL: logging level name for the command-line front end
      (default: INFO)
"""

import logging
import os
from dataclasses import dataclass, field

from two_setting_bell.errors import ValidationError

logger = logging.getLogger(__name__)

# Size caps
MAX_DIMENSION = 4096
MAX_QUBITS = 12
EXHAUSTIVE_LHV_PARTIES = 8

# Tolerances
HERMITIAN_ATOL = 1e-9
PRUNE_ATOL = 1e-12
BOUND_ATOL = 1e-9


def get_thread_count():
    """
    Worker count for joblib, read from BELL_THREADS.
    """
    raw = os.environ.get("BELL_THREADS", "1")
    try:
        n_jobs = int(raw)
    except ValueError:
        raise ValidationError(f"BELL_THREADS must be an integer, got {raw!r}")
    if n_jobs == 0 or n_jobs < -1:
        raise ValidationError(f"BELL_THREADS must be >= 1 or -1, got {n_jobs}")
    return n_jobs


def get_log_level():
    """
    Logging level for the CLI, read from BELL_LOG_LEVEL.
    """
    name = os.environ.get("BELL_LOG_LEVEL", "INFO").upper()
    level = logging.getLevelName(name)
    if not isinstance(level, int):
        logger.warning(f"Unknown BELL_LOG_LEVEL {name!r}, falling back to INFO")
        return logging.INFO
    return level


@dataclass(frozen=True)
class OptimizerConfig:
    """Multi-start Nelder-Mead search parameters."""

    starts: int = 32
    max_iterations: int = 2000
    tolerance: float = 1e-8
    seed: int = 0
    n_jobs: int = field(default_factory=get_thread_count)

    def __post_init__(self):
        if self.starts < 1:
            raise ValidationError(f"starts must be positive, got {self.starts}")
        if self.max_iterations < 1:
            raise ValidationError(
                f"max_iterations must be positive, got {self.max_iterations}"
            )
        if not self.tolerance > 0:
            raise ValidationError(f"tolerance must be > 0, got {self.tolerance}")
