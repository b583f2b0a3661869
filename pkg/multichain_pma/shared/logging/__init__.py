"""Logging utilities using loguru."""

from .logger import configure_logging, get_logger, progress

__all__ = ["configure_logging", "get_logger", "progress"]
