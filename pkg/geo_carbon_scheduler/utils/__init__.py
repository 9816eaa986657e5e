"""Utility modules for the scheduler."""

from .config import get_config, load_run_config, validate_config
from .errors import GeoCarbonError, exit_code_for
from .log import configure_logging

__all__ = [
    "get_config",
    "load_run_config",
    "validate_config",
    "GeoCarbonError",
    "exit_code_for",
    "configure_logging",
]
