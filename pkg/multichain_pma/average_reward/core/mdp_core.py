"""Validation, induced chains and tangent perturbations for finite MDPs."""

from typing import Optional, Sequence, Union

import numpy as np

from ...shared.config import settings
from ...shared.logging import get_logger
from ..models.mdp import InducedChain, Mdp, Policy, TangentDirection, ValidationReport, Violation
from .errors import DimensionMismatchError, InvalidPolicyError, MdpError, StepTooLargeError, SupportError

logger = get_logger(__name__)

Distribution = Union[np.ndarray, Sequence[float]]


def validate_mdp(m: Mdp, tol: Optional[float] = None) -> ValidationReport:
    """Collect every invariant violation of ``m``.

    Args:
        m: MDP to check
        tol: Probability tolerance (defaults to ``settings.prob_tol``)

    Returns:
        ValidationReport, empty when the kernel is stochastic and rewards respect R
    """
    tol = settings.prob_tol if tol is None else tol
    violations = []

    for s, a, t in np.argwhere(~np.isfinite(m.kernel)):
        violations.append(Violation(
            kind="non_finite", state=int(s), action=int(a), next_state=int(t),
            message=f"P[{s}][{a}][{t}] is not finite",
        ))
    for s, a in np.argwhere(~np.isfinite(m.reward)):
        violations.append(Violation(
            kind="non_finite", state=int(s), action=int(a),
            message=f"r[{s}][{a}] is not finite",
        ))

    for s, a, t in np.argwhere(m.kernel < 0.0):
        violations.append(Violation(
            kind="negative", state=int(s), action=int(a), next_state=int(t),
            message=f"P[{s}][{a}][{t}] = {m.kernel[s, a, t]!r} is negative",
        ))

    sums = m.kernel.sum(axis=2)
    for s, a in np.argwhere(np.abs(sums - 1.0) > tol):
        violations.append(Violation(
            kind="row_sum", state=int(s), action=int(a),
            message=f"P[{s}][{a}] sums to {sums[s, a]!r}",
        ))

    for s, a in np.argwhere(np.abs(m.reward) > m.reward_bound):
        violations.append(Violation(
            kind="reward_bound", state=int(s), action=int(a),
            message=f"|r[{s}][{a}]| = {abs(m.reward[s, a])!r} exceeds R = {m.reward_bound!r}",
        ))

    report = ValidationReport(violations=violations)
    if report.ok:
        logger.debug(f"MDP with {m.n_states} states and {m.n_actions} actions is valid")
    else:
        logger.debug(f"MDP validation found {len(violations)} violations")
    return report


def validate_policy(m: Mdp, p: Policy) -> None:
    """Check that ``p`` is a policy for ``m``.

    Raises:
        DimensionMismatchError: table shape differs from (|S|, |A|)
        InvalidPolicyError: table has non-finite entries
    """
    if p.table.shape != (m.n_states, m.n_actions):
        raise DimensionMismatchError(
            f"policy shape {p.table.shape} does not match MDP ({m.n_states}, {m.n_actions})"
        )
    if not np.all(np.isfinite(p.table)):
        raise InvalidPolicyError("policy table has non-finite entries")


def require_interior(p: Policy) -> None:
    """Reject policies outside Pi_+ (some pi(a|s) == 0)."""
    if not p.is_interior():
        s, a = np.argwhere(p.table <= 0.0)[0]
        raise SupportError(f"policy has zero entry at ({s}, {a}); an interior policy is required")


def as_distribution(mu: Distribution, n_states: int, full_support: bool = False) -> np.ndarray:
    """Coerce ``mu`` to a probability vector over the states.

    Args:
        mu: Sequence of probabilities
        n_states: Expected length
        full_support: Reject distributions with a zero entry

    Returns:
        float64 vector
    """
    vec = np.asarray(mu, dtype=float)
    if vec.shape != (n_states,):
        raise DimensionMismatchError(f"distribution shape {vec.shape} != ({n_states},)")
    if np.any(vec < 0.0) or abs(vec.sum() - 1.0) > settings.prob_tol * max(1, n_states):
        raise MdpError(f"not a probability distribution (sum {vec.sum()!r}, min {vec.min()!r})")
    if full_support and np.any(vec <= 0.0):
        raise SupportError(f"distribution has zero mass at state {int(np.argmin(vec))}")
    return vec


def uniform_distribution(n_states: int) -> np.ndarray:
    """Uniform probability vector over ``n_states`` states."""
    return np.full(n_states, 1.0 / n_states)


def induce_chain(m: Mdp, p: Policy) -> InducedChain:
    """Markov chain, reward vector and policy matrix induced by ``p``.

    Args:
        m: MDP
        p: Policy for ``m``

    Returns:
        InducedChain with P^pi, r^pi and Theta_pi
    """
    validate_policy(m, p)
    pi = p.table
    p_pi = np.einsum("sa,sat->st", pi, m.kernel)
    r_pi = np.einsum("sa,sa->s", pi, m.reward)

    theta = np.zeros((m.n_states, m.n_states * m.n_actions))
    rows = np.repeat(np.arange(m.n_states), m.n_actions)
    theta[rows, np.arange(m.n_states * m.n_actions)] = pi.ravel()

    return InducedChain(p_pi=p_pi, r_pi=r_pi, theta_pi=theta)


def perturb_policy(p: Policy, u: TangentDirection, t: float) -> Policy:
    """Move ``p`` along a tangent direction.

    Args:
        p: Base policy
        u: Direction with zero row sums
        t: Step length

    Returns:
        Policy with table p + t u

    Raises:
        StepTooLargeError: a moved entry leaves the open interval (0, 1)
    """
    if u.table.shape != p.table.shape:
        raise DimensionMismatchError(f"direction shape {u.table.shape} != policy shape {p.table.shape}")
    if t == 0.0:
        return p

    table = p.table + t * u.table
    moved = u.table != 0.0
    outside = moved & ((table <= 0.0) | (table >= 1.0))
    if np.any(outside):
        s, a = np.argwhere(outside)[0]
        raise StepTooLargeError(int(s), int(a), float(table[s, a]))
    return Policy(table=table)
