"""Base classes for solvers and common functionality."""

from .solver import BaseSolver

__all__ = ["BaseSolver"]
