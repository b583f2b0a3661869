"""Configuration management utilities."""

from .settings import Settings, settings

__all__ = ["Settings", "settings"]
