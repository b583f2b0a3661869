"""Shared Utilities

Settings, logging and base classes used across the multichain_pma package.
"""

from .base.solver import BaseSolver
from .config.settings import Settings, settings
from .logging.logger import configure_logging, get_logger

__all__ = [
    "BaseSolver",
    "Settings",
    "settings",
    "configure_logging",
    "get_logger",
]
