"""
Configuration settings for the card ZKP workbench
"""

import logging
import os

from dotenv import load_dotenv

load_dotenv(override=False)

logger = logging.getLogger(__name__)


def _int_env(name: str, default: int) -> int:
    raw = os.getenv(name)
    if not raw:
        return default
    try:
        return int(raw)
    except ValueError:
        logger.warning("Invalid %s=%r. Falling back to %s.", name, raw, default)
        return default


# Logging
LOG_LEVEL = (os.getenv("CARDZK_LOG_LEVEL") or os.getenv("LOG_LEVEL") or "WARNING").upper()
LOG_FORMAT = "%(asctime)s %(levelname)s %(name)s %(message)s"

# Protocol run settings
DEFAULT_SEED = 42
MAX_SEED = 2**64 - 1
DEFAULT_TRIALS = _int_env("CARDZK_DEFAULT_TRIALS", 1000)
# 0 lets the sweep pick: one process per CPU for large sweeps
AUDIT_WORKERS = _int_env("CARDZK_AUDIT_WORKERS", 0)

# Significance level for the audit command's chi-square tests
CHI_SQUARE_SIGNIFICANCE = 0.01

# Directory settings
RESULTS_BASE_DIR = os.getenv("CARDZK_RESULTS_DIR", "results")

# Exit codes
EXIT_OK = 0
EXIT_REJECTED = 1
EXIT_PARSE_ERROR = 2
EXIT_MISSING_WITNESS = 3

# Error messages
ERROR_MESSAGES = {
    'parse_failed': 'Could not parse puzzle file {path}: {error}',
    'missing_witness': 'Puzzle file {path} has no solution/picks block to prove with.',
    'transcript_unreadable': 'Could not read transcript {path}: {error}',
    'transcript_rejected': 'Transcript is not a legal accepting view: {error}',
    'no_solutions': 'No solutions found.',
    'audit_failed': 'Audit failed: {checks}',
    'unexpected_error': 'Unexpected error: {error}',
}
