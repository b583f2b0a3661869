"""Counter-based random streams keyed by integer tuples, and inverse-CDF draws."""

from typing import Sequence

import numpy as np


def keyed_generator(seed: int, key: Sequence[int]) -> np.random.Generator:
    """Philox generator for ``(seed, *key)``.

    Distinct keys give independent streams; the same key always replays the
    same draws regardless of call order.
    """
    seq = np.random.SeedSequence(int(seed), spawn_key=tuple(int(k) for k in key))
    return np.random.Generator(np.random.Philox(seq))


def cumulative(probabilities: np.ndarray) -> np.ndarray:
    """Row-wise CDF along the last axis, renormalised so every row ends at 1."""
    cdf = np.cumsum(probabilities, axis=-1)
    return cdf / cdf[..., -1:]


def sample_index(cdf: np.ndarray, u: float) -> int:
    """Inverse-CDF draw from a cumulative probability row."""
    idx = int(np.searchsorted(cdf, u, side="right"))
    return min(idx, cdf.size - 1)


def sample_indices(rows: np.ndarray, u: np.ndarray) -> np.ndarray:
    """``sample_index`` applied to each (row, uniform) pair."""
    idx = (rows <= u[:, None]).sum(axis=1)
    return np.minimum(idx, rows.shape[1] - 1)
