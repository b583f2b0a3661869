"""Bregman divergences, floored-simplex projections and the per-state mirror step."""

import math
from typing import Optional

import numpy as np
from scipy.special import rel_entr

from ...shared.config import settings
from ...shared.logging import get_logger
from ..models.projection import DivergenceKind, FlooredSimplexPoint
from .errors import DimensionMismatchError, InfeasibleConfigError, ProjectionError, SupportError

logger = get_logger(__name__)


def divergence(kind: DivergenceKind, p: np.ndarray, p2: np.ndarray) -> float:
    """Bregman divergence D(p, p2).

    Args:
        kind: EUCLIDEAN gives 0.5 ||p - p2||^2, KL gives sum p log(p / p2)
        p: First probability vector
        p2: Second probability vector

    Returns:
        Nonnegative divergence
    """
    p = np.asarray(p, dtype=float)
    p2 = np.asarray(p2, dtype=float)
    if p.shape != p2.shape:
        raise DimensionMismatchError(f"vector shapes differ: {p.shape} vs {p2.shape}")

    kind = DivergenceKind(kind)
    if kind == DivergenceKind.EUCLIDEAN:
        return 0.5 * float(np.sum((p - p2) ** 2))

    if np.any((p2 <= 0.0) & (p > 0.0)):
        i = int(np.argmax((p2 <= 0.0) & (p > 0.0)))
        raise SupportError(f"KL divergence undefined: p[{i}] > 0 where p2[{i}] = 0")
    return float(np.sum(rel_entr(p, p2)))


def _check_floor(d: int, alpha: float) -> bool:
    """Validate the floor; True when d * alpha == 1 (the singleton case)."""
    if alpha < 0.0 or not math.isfinite(alpha):
        raise ProjectionError(f"floor must be a nonnegative number, got {alpha!r}")
    if alpha * d > 1.0 + settings.prob_tol:
        raise ProjectionError(f"floor {alpha} exceeds 1/d = {1.0 / d} (empty feasible set)")
    return abs(alpha * d - 1.0) <= settings.prob_tol


def euclid_project_floor(q: np.ndarray, alpha: float) -> FlooredSimplexPoint:
    """Euclidean projection of ``q`` onto {p in simplex : p >= alpha}.

    Sort descending, keep the largest prefix j with
    q'_j + (1 - d alpha - sum_{i<=j} q'_i) / j > 0, then
    p = max(q + lambda + alpha, alpha).

    Args:
        q: Point to project
        alpha: Floor, at most 1/d

    Returns:
        FlooredSimplexPoint
    """
    q = np.asarray(q, dtype=float).ravel()
    d = q.size
    if d == 0 or not np.all(np.isfinite(q)):
        raise ProjectionError("projection input must be a nonempty finite vector")
    if _check_floor(d, alpha):
        return FlooredSimplexPoint(p=np.full(d, 1.0 / d), alpha=alpha)

    # shifting q by a constant leaves the projection unchanged
    shifted = q - q.max()
    radius = 1.0 - d * alpha
    u = np.sort(shifted, kind="stable")[::-1]
    css = np.cumsum(u)
    j = np.arange(1, d + 1)
    support = np.nonzero(u + (radius - css) / j > 0.0)[0]
    rho = int(support[-1]) + 1
    lam = (radius - css[rho - 1]) / rho

    p = np.maximum(shifted + lam + alpha, alpha)
    return FlooredSimplexPoint(p=p, alpha=alpha)


def kl_project_floor(w: np.ndarray, alpha: float) -> FlooredSimplexPoint:
    """KL projection argmin_{p >= alpha} KL(p | w) by median pivoting.

    The solution is p_i = max(alpha, m0 w_i). Each pass takes the lower median
    of the undecided weights and decides whether it is clipped, halving the
    undecided set.

    Args:
        w: Strictly positive weights summing to one
        alpha: Floor, at most 1/d

    Returns:
        FlooredSimplexPoint
    """
    w = np.asarray(w, dtype=float).ravel()
    d = w.size
    if d == 0 or not np.all(np.isfinite(w)):
        raise ProjectionError("projection input must be a nonempty finite vector")
    if np.any(w <= 0.0):
        raise ProjectionError(f"KL projection needs strictly positive weights (min {w.min()!r})")
    total = float(w.sum())
    if abs(total - 1.0) > settings.prob_tol * d:
        raise ProjectionError(f"KL projection weights sum to {total!r}")
    if _check_floor(d, alpha):
        return FlooredSimplexPoint(p=np.full(d, 1.0 / d), alpha=alpha)
    if alpha == 0.0:
        return FlooredSimplexPoint(p=w / total, alpha=alpha)

    clipped = np.zeros(d, dtype=bool)
    clipped_count, clipped_mass = 0, 0.0
    undecided = np.arange(d)
    cap = math.ceil(math.log2(d)) + 2 if d > 1 else 2

    for _ in range(cap):
        if undecided.size == 0:
            break
        values = w[undecided]
        pivot = np.sort(values, kind="stable")[(values.size - 1) // 2]
        low = undecided[values < pivot]
        mid = undecided[values == pivot]
        high = undecided[values > pivot]

        scale = (1.0 - (clipped_count + low.size) * alpha) / (total - clipped_mass - w[low].sum())
        if pivot * scale < alpha:
            newly = np.concatenate([low, mid])
            clipped[newly] = True
            clipped_count += newly.size
            clipped_mass += float(w[newly].sum())
            undecided = high
        else:
            undecided = low
    else:
        if undecided.size:
            raise ProjectionError(f"KL projection did not terminate within {cap} passes (d = {d})")

    free_mass = total - clipped_mass
    if free_mass <= 0.0:
        raise ProjectionError("KL projection clipped every coordinate")
    scale = (1.0 - clipped_count * alpha) / free_mass
    p = np.where(clipped, alpha, scale * w)
    return FlooredSimplexPoint(p=p, alpha=alpha)


def mirror_step(
    row: FlooredSimplexPoint,
    g_row: np.ndarray,
    eta: float,
    kind: DivergenceKind,
    max_step: Optional[float] = None,
) -> FlooredSimplexPoint:
    """One state's update argmax_{p in M_alpha} eta <g, p> - D(p, row).

    Args:
        row: Current pi(.|s) with its floor
        g_row: G(s, .)
        eta: Step size (capped at ``settings.max_step_size``)
        kind: Divergence generating the step

    Returns:
        Next pi(.|s)
    """
    g_row = np.asarray(g_row, dtype=float).ravel()
    if g_row.shape != row.p.shape:
        raise DimensionMismatchError(f"gradient row shape {g_row.shape} != {row.p.shape}")
    if not eta > 0.0:
        raise InfeasibleConfigError(f"step size must be positive, got {eta!r}")
    eta = min(eta, settings.max_step_size if max_step is None else max_step)

    kind = DivergenceKind(kind)
    if kind == DivergenceKind.EUCLIDEAN:
        return euclid_project_floor(row.p + eta * (g_row - g_row.max()), row.alpha)

    if np.any(row.p <= 0.0):
        raise SupportError("KL mirror step needs a strictly positive row")
    z = eta * g_row
    z -= z.max()
    weights = np.maximum(row.p * np.exp(z), np.finfo(float).tiny)
    return kl_project_floor(weights / weights.sum(), row.alpha)


def mirror_table(
    table: np.ndarray,
    g: np.ndarray,
    eta: float,
    kind: DivergenceKind,
    alpha: float,
) -> np.ndarray:
    """Apply ``mirror_step`` to every state of a policy table."""
    rows = [
        mirror_step(FlooredSimplexPoint(p=table[s], alpha=alpha), g[s], eta, kind).p
        for s in range(table.shape[0])
    ]
    return np.vstack(rows)
