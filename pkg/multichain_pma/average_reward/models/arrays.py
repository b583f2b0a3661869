"""Helpers for storing numpy arrays on frozen pydantic models."""

from typing import Any

import numpy as np


def frozen_array(value: Any) -> np.ndarray:
    """Copy ``value`` into a read-only float64 array."""
    arr = np.array(value, dtype=float)
    arr.setflags(write=False)
    return arr
