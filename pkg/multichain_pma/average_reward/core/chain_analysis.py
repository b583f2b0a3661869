"""Recurrent/transient classification, canonical blocks, Cesaro limits and chain constants."""

import math
from itertools import combinations
from typing import Iterable, List, Optional, Tuple

import numpy as np
from scipy.linalg import lu_factor, lu_solve
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from ...shared.config import settings
from ...shared.logging import get_logger
from ..models.chain import (
    CanonicalForm,
    ChainConstants,
    Classification,
    TargetTimeRow,
    VisitationBundle,
)
from ..models.mdp import Mdp, Policy
from ..utils.streams import cumulative, keyed_generator, sample_index
from .errors import DimensionMismatchError, MdpError, SingularBlockError
from .mdp_core import Distribution, as_distribution, induce_chain, require_interior

logger = get_logger(__name__)


# ---------------------------------------------------------------------------
# Linear algebra
# ---------------------------------------------------------------------------

def solve_block(a: np.ndarray, b: np.ndarray, block: str, pivot_tol: Optional[float] = None) -> np.ndarray:
    """Solve ``a x = b`` by partial-pivoting LU.

    Args:
        a: Square coefficient matrix
        b: Right-hand side (vector or matrix)
        block: Name reported when the system is singular
        pivot_tol: Smallest admissible |pivot| (defaults to ``settings.pivot_tol``)

    Returns:
        Solution with the shape of ``b``

    Raises:
        SingularBlockError: a pivot fell below tolerance
    """
    pivot_tol = settings.pivot_tol if pivot_tol is None else pivot_tol
    b = np.asarray(b, dtype=float)
    if a.shape[0] == 0:
        return np.zeros_like(b)
    lu, piv = lu_factor(a, check_finite=True)
    pivots = np.abs(np.diag(lu))
    smallest = float(pivots.min())
    if smallest < pivot_tol:
        raise SingularBlockError(block, smallest)
    return lu_solve((lu, piv), b)


# ---------------------------------------------------------------------------
# Classification
# ---------------------------------------------------------------------------

def _closed_components(adjacency: np.ndarray) -> Classification:
    n = adjacency.shape[0]
    n_comp, labels = connected_components(
        csr_matrix(adjacency.astype(np.int8)), directed=True, connection="strong", return_labels=True
    )
    classes: List[List[int]] = []
    transient: List[int] = []
    for comp in range(n_comp):
        members = np.flatnonzero(labels == comp)
        inside = np.zeros(n, dtype=bool)
        inside[members] = True
        if adjacency[np.ix_(members, ~inside)].any():
            transient.extend(int(s) for s in members)
        else:
            classes.append([int(s) for s in members])
    return Classification(n_states=n, recurrent_classes=classes, transient=transient)


def classify(m: Mdp) -> Classification:
    """Classify states on the uniform-support chain of ``m``.

    An edge s -> s' exists when some action moves s to s' with positive
    probability. Closed strongly connected components are the recurrent
    classes; every other state is transient. The result is shared by every
    interior policy.

    Args:
        m: MDP

    Returns:
        Classification
    """
    adjacency = (m.kernel > 0.0).any(axis=1)
    c = _closed_components(adjacency)
    logger.debug(f"Classified {m.n_states} states: {c.m} recurrent classes, {len(c.transient)} transient")
    return c


def classify_chain(matrix: np.ndarray) -> Classification:
    """Classification of an arbitrary stochastic matrix (boundary policies included)."""
    matrix = np.asarray(matrix, dtype=float)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise DimensionMismatchError(f"transition matrix must be square, got shape {matrix.shape}")
    return _closed_components(matrix > 0.0)


# ---------------------------------------------------------------------------
# Canonical form and Cesaro limit
# ---------------------------------------------------------------------------

def _check_classification(n_states: int, c: Classification) -> None:
    if c.n_states != n_states:
        raise DimensionMismatchError(f"classification covers {c.n_states} states, chain has {n_states}")


def stationary_distribution(block: np.ndarray, name: str = "recurrent") -> np.ndarray:
    """Stationary vector of an irreducible block from (R^T - I) g = 0, 1^T g = 1."""
    n = block.shape[0]
    if n == 1:
        return np.ones(1)
    a = block.T - np.eye(n)
    a[-1, :] = 1.0
    rhs = np.zeros(n)
    rhs[-1] = 1.0
    return solve_block(a, rhs, name)


def decompose_matrix(
    p_pi: np.ndarray, c: Classification
) -> Tuple[List[np.ndarray], List[np.ndarray], np.ndarray, List[np.ndarray]]:
    """Blocks R_i, S_i, T and stationary vectors g_i of a transition matrix.

    Raises:
        MdpError: a listed class is not closed under ``p_pi``
    """
    _check_classification(p_pi.shape[0], c)
    transient = c.transient
    recurrent_blocks, transient_to_class, stationary = [], [], []
    for i, cls in enumerate(c.recurrent_classes):
        block = p_pi[np.ix_(cls, cls)]
        leak = float(np.max(np.abs(block.sum(axis=1) - 1.0)))
        if leak > settings.identity_tol:
            raise MdpError(f"class {i} {cls} is not closed under the chain (leak {leak:.3e})")
        recurrent_blocks.append(block)
        transient_to_class.append(p_pi[np.ix_(transient, cls)])
        stationary.append(stationary_distribution(block, name=f"R_{i}"))
    transient_block = p_pi[np.ix_(transient, transient)]
    return recurrent_blocks, transient_to_class, transient_block, stationary


def canonical_decompose(m: Mdp, p: Policy, c: Classification) -> CanonicalForm:
    """Canonical blocks of P^pi (classes first, transient states last).

    Args:
        m: MDP
        p: Interior policy
        c: Classification of ``m``

    Returns:
        CanonicalForm
    """
    require_interior(p)
    chain = induce_chain(m, p)
    blocks, to_class, t_block, stationary = decompose_matrix(chain.p_pi, c)
    permutation = [s for cls in c.recurrent_classes for s in cls] + list(c.transient)
    return CanonicalForm(
        classification=c,
        permutation=permutation,
        recurrent_blocks=blocks,
        transient_to_class=to_class,
        transient_block=t_block,
        stationary=stationary,
    )


def cesaro_from_matrix(p_pi: np.ndarray, c: Classification) -> np.ndarray:
    """Assemble P_star from the canonical blocks of ``p_pi``."""
    n = p_pi.shape[0]
    blocks, to_class, t_block, stationary = decompose_matrix(p_pi, c)
    p_star = np.zeros((n, n))
    transient = c.transient

    absorption = None
    if transient:
        rhs = np.column_stack([s_i.sum(axis=1) for s_i in to_class])
        absorption = solve_block(np.eye(len(transient)) - t_block, rhs, "transient")

    for i, (cls, g) in enumerate(zip(c.recurrent_classes, stationary)):
        p_star[np.ix_(cls, cls)] = np.outer(np.ones(len(cls)), g)
        if absorption is not None:
            p_star[np.ix_(transient, cls)] = np.outer(absorption[:, i], g)
    return p_star


def cesaro_limit(m: Mdp, p: Policy, c: Classification) -> np.ndarray:
    """Cesaro limit P^pi_star of an interior policy."""
    require_interior(p)
    return cesaro_from_matrix(induce_chain(m, p).p_pi, c)


def transient_inverse_row(p_pi: np.ndarray, c: Classification, weights: np.ndarray) -> np.ndarray:
    """Row vector weights^T (I - T_bar)^-1 over all states."""
    out = np.array(weights, dtype=float)
    transient = c.transient
    if transient:
        t_block = p_pi[np.ix_(transient, transient)]
        a = (np.eye(len(transient)) - t_block).T
        out[transient] = solve_block(a, out[transient], "transient")
    return out


def visitation(m: Mdp, p: Policy, mu: Distribution, c: Classification) -> VisitationBundle:
    """Recurrent measure d, transient measure delta and the splice rho.

    Args:
        m: MDP
        p: Interior policy
        mu: Initial distribution (full support not required here)
        c: Classification of ``m``

    Returns:
        VisitationBundle
    """
    require_interior(p)
    mu = as_distribution(mu, m.n_states)
    p_pi = induce_chain(m, p).p_pi
    d = mu @ cesaro_from_matrix(p_pi, c)
    delta = transient_inverse_row(p_pi, c, mu)
    rho = np.where(c.recurrent_mask, d, delta)
    return VisitationBundle(d=d, delta=delta, rho=rho)


# ---------------------------------------------------------------------------
# Chain constants
# ---------------------------------------------------------------------------

def hitting_times(block: np.ndarray, target: int, name: str = "hitting") -> np.ndarray:
    """Mean first passage times to ``target`` from every state of ``block``."""
    n = block.shape[0]
    a = np.eye(n) - block
    a[target, :] = 0.0
    a[target, target] = 1.0
    b = np.ones(n)
    b[target] = 0.0
    return solve_block(a, b, name)


def expected_target_time(block: np.ndarray, g: np.ndarray) -> float:
    """max_x sum_{s'} g(s') E[hitting time of s' | x] over the class."""
    n = block.shape[0]
    if n == 1:
        return 0.0
    hit = np.column_stack([hitting_times(block, j, name=f"hitting_{j}") for j in range(n)])
    return float(np.max(hit @ g))


def _row_norm(matrix: np.ndarray) -> float:
    return float(np.max(matrix.sum(axis=1))) if matrix.size else 0.0


def transient_half_life(t_block: np.ndarray, max_doublings: int = 64) -> int:
    """min{t >= 1 : ||T^t||_inf <= 1/2}; 0 when there are no transient states."""
    if t_block.shape[0] == 0:
        return 0
    powers = [t_block]
    while _row_norm(powers[-1]) > 0.5:
        if len(powers) > max_doublings:
            raise SingularBlockError("transient", _row_norm(powers[-1]))
        powers.append(powers[-1] @ powers[-1])

    # largest t with ||T^t|| > 1/2 by binary lifting over the stored powers
    steps = 0
    current = np.eye(t_block.shape[0])
    for j in range(len(powers) - 2, -1, -1):
        candidate = current @ powers[j]
        if _row_norm(candidate) > 0.5:
            current = candidate
            steps += 1 << j
    return steps + 1


def exact_cover_time(block: np.ndarray, name: str = "cover") -> float:
    """Expected cover time maximised over start states, via the visited-subset chain.

    Counts the start state as visited at time 0, so a single state has cover
    time 1.
    """
    n = block.shape[0]
    full = (1 << n) - 1
    remaining = {full: np.zeros(n)}

    for size in range(n - 1, 0, -1):
        for members in combinations(range(n), size):
            mask = sum(1 << s for s in members)
            idx = list(members)
            outside = [y for y in range(n) if not mask & (1 << y)]
            rhs = np.ones(size)
            for y in outside:
                rhs += block[idx, y] * remaining[mask | (1 << y)][y]
            values = np.full(n, np.nan)
            values[idx] = solve_block(np.eye(size) - block[np.ix_(idx, idx)], rhs, name)
            remaining[mask] = values

    return float(max(1.0 + remaining[1 << x][x] for x in range(n)))


def estimate_cover_time(
    block: np.ndarray, class_index: int, episodes: int, seed: int
) -> Tuple[float, float]:
    """Monte Carlo cover time: (estimate, standard error) at the worst start state."""
    n = block.shape[0]
    cdf = cumulative(block)
    best, best_err = -math.inf, 0.0
    for x in range(n):
        samples = np.empty(episodes)
        for e in range(episodes):
            rng = keyed_generator(seed, (class_index, x, e))
            visited = np.zeros(n, dtype=bool)
            visited[x] = True
            count, state, steps = 1, x, 1
            while count < n:
                state = sample_index(cdf[state], rng.random())
                steps += 1
                if not visited[state]:
                    visited[state] = True
                    count += 1
            samples[e] = steps
        mean = float(samples.mean())
        if mean > best:
            best = mean
            best_err = float(samples.std(ddof=1) / math.sqrt(episodes)) if episodes > 1 else 0.0
    return best, best_err


def chain_constants(
    m: Mdp,
    p: Policy,
    c: Classification,
    mc_budget: Optional[int] = None,
    seed: Optional[int] = None,
) -> ChainConstants:
    """Expected target time, transient half-life and cover time of P^pi.

    Args:
        m: MDP
        p: Interior policy
        c: Classification of ``m``
        mc_budget: Episodes per start state for classes above the exact size cap
        seed: Root seed of the Monte Carlo episodes

    Returns:
        ChainConstants
    """
    require_interior(p)
    mc_budget = settings.mc_budget if mc_budget is None else mc_budget
    seed = settings.default_seed if seed is None else seed
    blocks, _, t_block, stationary = decompose_matrix(induce_chain(m, p).p_pi, c)

    t_tar = [expected_target_time(b, g) for b, g in zip(blocks, stationary)]

    t_cov, estimated, stderr = [], [], []
    for i, block in enumerate(blocks):
        if block.shape[0] <= settings.exact_cover_max:
            t_cov.append(exact_cover_time(block, name=f"cover_{i}"))
            estimated.append(False)
            stderr.append(0.0)
        else:
            value, err = estimate_cover_time(block, i, mc_budget, seed)
            logger.warning(
                f"Cover time of class {i} ({block.shape[0]} states) is a Monte Carlo estimate: "
                f"{value:.3f} +/- {err:.3f}"
            )
            t_cov.append(value)
            estimated.append(True)
            stderr.append(err)

    constants = ChainConstants(
        t_tar_per_class=t_tar,
        t_tar=max(t_tar),
        t_half=transient_half_life(t_block),
        t_cov_per_class=t_cov,
        t_cov=max(t_cov),
        t_cov_estimated=estimated,
        t_cov_stderr=stderr,
    )
    logger.info(
        f"Chain constants: t_tar={constants.t_tar:.4g}, t_half={constants.t_half}, t_cov={constants.t_cov:.4g}"
    )
    return constants


def target_time_report(
    m: Mdp,
    p: Policy,
    c: Classification,
    ks: Iterable[int] = (1, 10, 100),
) -> List[TargetTimeRow]:
    """Cesaro-average deviation from g_i against 2 t_tar,i / k.

    For each class, start state s and k, the deviation is the l1 distance
    between (1/k) sum_{j=1..k} R^j(s, .) and g_i.
    """
    require_interior(p)
    ks = sorted(set(int(k) for k in ks))
    if not ks or ks[0] < 1:
        raise ValueError("k values must be positive")
    blocks, _, _, stationary = decompose_matrix(induce_chain(m, p).p_pi, c)

    rows: List[TargetTimeRow] = []
    for i, (block, g) in enumerate(zip(blocks, stationary)):
        bound_scale = 2.0 * expected_target_time(block, g)
        power = np.eye(block.shape[0])
        total = np.zeros_like(power)
        wanted = set(ks)
        for k in range(1, ks[-1] + 1):
            power = power @ block
            total += power
            if k in wanted:
                deviation = np.abs(total / k - g[None, :]).sum(axis=1)
                for local, state in enumerate(c.recurrent_classes[i]):
                    rows.append(TargetTimeRow(
                        class_index=i, state=state, k=k,
                        deviation=float(deviation[local]), bound=bound_scale / k,
                    ))
    return rows

