"""Multichain average-reward policy iteration over deterministic policies."""

from typing import Optional, Sequence

import numpy as np

from ...shared.logging import get_logger
from ..models.mdp import Mdp, Policy
from ..models.pma import PolicyIterationResult
from .values import evaluate_any

logger = get_logger(__name__)

TIE_TOL = 1e-10


def _improve(scores: np.ndarray, current: np.ndarray, allowed: Optional[np.ndarray] = None) -> np.ndarray:
    """Greedy actions, keeping the current action whenever it ties the best."""
    if allowed is not None:
        scores = np.where(allowed, scores, -np.inf)
    states = np.arange(scores.shape[0])
    best = np.argmax(scores, axis=1)
    keep = np.isclose(scores[states, current], scores[states, best], atol=TIE_TOL, rtol=0.0)
    return np.where(keep, current, best)


def policy_iteration(
    m: Mdp,
    initial: Optional[Sequence[int]] = None,
    max_iterations: int = 1000,
) -> PolicyIterationResult:
    """Gain-then-bias policy iteration for multichain MDPs.

    Each pass first improves the action gain P J; only when no state changes
    does it improve r + P V among the gain-maximising actions. Ties always
    keep the current action, which guarantees termination.

    Args:
        m: MDP
        initial: Starting deterministic actions (defaults to the greedy reward)
        max_iterations: Pass limit

    Returns:
        PolicyIterationResult with the gain-bias optimal policy
    """
    actions = np.argmax(m.reward, axis=1) if initial is None else np.asarray(initial, dtype=int)
    converged = False
    iteration = 0
    values = None

    for iteration in range(1, max_iterations + 1):
        policy = Policy.deterministic(actions, m.n_actions)
        values = evaluate_any(m, policy)

        gain_scores = np.einsum("sat,t->sa", m.kernel, values.j)
        new_actions = _improve(gain_scores, actions)
        if np.any(new_actions != actions):
            actions = new_actions
            continue

        best_gain = gain_scores.max(axis=1, keepdims=True)
        allowed = np.isclose(gain_scores, best_gain, atol=TIE_TOL, rtol=0.0)
        bias_scores = m.reward + np.einsum("sat,t->sa", m.kernel, values.v)
        new_actions = _improve(bias_scores, actions, allowed)
        if np.all(new_actions == actions):
            converged = True
            break
        actions = new_actions

    if not converged:
        logger.warning(f"Policy iteration stopped after {max_iterations} passes without converging")
        policy = Policy.deterministic(actions, m.n_actions)
        values = evaluate_any(m, policy)

    logger.info(f"Policy iteration finished in {iteration} passes, max gain {values.j.max():.6g}")
    return PolicyIterationResult(
        actions=[int(a) for a in actions],
        gain=values.j,
        bias=values.v,
        q_star=values.q,
        iterations=iteration,
        converged=converged,
    )
