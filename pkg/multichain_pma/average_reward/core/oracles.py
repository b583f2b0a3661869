"""Independent brute-force references used by the property suites."""

from itertools import combinations
from typing import Optional

import numpy as np
from scipy.special import rel_entr

from ..models.projection import DivergenceKind
from .errors import ProjectionError


def _pattern_point(kind: DivergenceKind, q: np.ndarray, alpha: float, clipped: np.ndarray) -> Optional[np.ndarray]:
    """Closed-form minimiser with ``clipped`` fixed at alpha, or None if degenerate."""
    free = ~clipped
    budget = 1.0 - clipped.sum() * alpha
    p = np.full(q.size, alpha)
    if kind == DivergenceKind.EUCLIDEAN:
        lam = (budget - q[free].sum()) / free.sum()
        p[free] = q[free] + lam
    else:
        mass = q[free].sum()
        if mass <= 0.0:
            return None
        p[free] = q[free] * (budget / mass)
    return p


def _objective(kind: DivergenceKind, p: np.ndarray, q: np.ndarray) -> float:
    if kind == DivergenceKind.EUCLIDEAN:
        return 0.5 * float(np.sum((p - q) ** 2))
    return float(np.sum(rel_entr(p, q)))


def brute_force_project(kind: DivergenceKind, q: np.ndarray, alpha: float, tol: float = 1e-12) -> np.ndarray:
    """Projection onto {p in simplex : p >= alpha} by enumerating clipped sets.

    Every proper subset of coordinates is tried as the set held at the floor.
    A pattern is accepted when its closed-form point is feasible and its
    multipliers satisfy the KKT sign conditions; among accepted patterns the
    lowest objective wins.

    Args:
        kind: Divergence (KL expects strictly positive weights summing to one)
        q: Point or weights to project
        alpha: Floor
        tol: Slack for feasibility and KKT checks

    Returns:
        Projected point
    """
    kind = DivergenceKind(kind)
    q = np.asarray(q, dtype=float).ravel()
    d = q.size
    if alpha * d > 1.0 + tol:
        raise ProjectionError(f"floor {alpha} exceeds 1/d")
    if abs(alpha * d - 1.0) <= tol:
        return np.full(d, 1.0 / d)

    best, best_value = None, np.inf
    fallback, fallback_value = None, np.inf
    for size in range(d):
        for members in combinations(range(d), size):
            clipped = np.zeros(d, dtype=bool)
            clipped[list(members)] = True
            p = _pattern_point(kind, q, alpha, clipped)
            if p is None or np.any(p[~clipped] < alpha - tol):
                continue
            value = _objective(kind, p, q)
            if value < fallback_value:
                fallback, fallback_value = p, value

            if kind == DivergenceKind.EUCLIDEAN:
                lam = p[~clipped][0] - q[~clipped][0]
                kkt = np.all(q[clipped] + lam <= alpha + tol)
            else:
                scale = p[~clipped][0] / q[~clipped][0]
                kkt = np.all(scale * q[clipped] <= alpha + tol)
            if kkt and value < best_value:
                best, best_value = p, value

    if best is None:
        if fallback is None:
            raise ProjectionError("no feasible clipping pattern found")
        return fallback
    return best


def truncated_cesaro_average(p_pi: np.ndarray, horizon: int) -> np.ndarray:
    """(1/H) sum_{i=0}^{H-1} P^i."""
    if horizon < 1:
        raise ValueError(f"horizon must be positive, got {horizon}")
    n = p_pi.shape[0]
    power = np.eye(n)
    total = np.zeros((n, n))
    for _ in range(horizon):
        total += power
        power = power @ p_pi
    return total / horizon
