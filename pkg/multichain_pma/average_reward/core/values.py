"""Exact policy evaluation, performance difference and the direct policy gradient."""

from typing import Optional

import numpy as np

from ...shared.config import settings
from ...shared.logging import get_logger
from ..models.chain import Classification
from ..models.mdp import InducedChain, Mdp, Policy, TangentDirection
from ..models.values import BellmanResiduals, GradientTable, PerformanceDifference, ValueBundle
from .chain_analysis import cesaro_from_matrix, classify, classify_chain, solve_block, visitation
from .errors import DimensionMismatchError, SupportError
from .mdp_core import Distribution, as_distribution, induce_chain, perturb_policy, require_interior

logger = get_logger(__name__)


def _evaluate_chain(m: Mdp, chain: InducedChain, c: Classification) -> ValueBundle:
    p_pi, r_pi = chain.p_pi, chain.r_pi
    n = m.n_states
    p_star = cesaro_from_matrix(p_pi, c)

    j = p_star @ r_pi
    eye = np.eye(n)
    v = solve_block(eye - p_pi + p_star, (eye - p_star) @ r_pi, "fundamental")

    k = np.einsum("sat,t->sa", m.kernel, j)
    q = m.reward + np.einsum("sat,t->sa", m.kernel, v) - k
    g = np.where(c.recurrent_mask[:, None], q, k)
    return ValueBundle(j=j, v=v, k=k, q=q, g=g, p_star=p_star)


def evaluate(m: Mdp, p: Policy, c: Classification) -> ValueBundle:
    """Gain, bias, action gain, relative action value and G of an interior policy.

    Args:
        m: MDP
        p: Policy in Pi_+
        c: Classification of ``m``

    Returns:
        ValueBundle computed by exact linear algebra
    """
    require_interior(p)
    values = _evaluate_chain(m, induce_chain(m, p), c)
    logger.debug(f"Evaluated policy: J in [{values.j.min():.6g}, {values.j.max():.6g}]")
    return values


def evaluate_any(m: Mdp, p: Policy) -> ValueBundle:
    """Evaluate any policy, boundary and deterministic ones included.

    The classification comes from the induced chain itself, so G splices Q
    and K according to that policy's own recurrent states.
    """
    chain = induce_chain(m, p)
    return _evaluate_chain(m, chain, classify_chain(chain.p_pi))


def bellman_residuals(m: Mdp, p: Policy, values: ValueBundle) -> BellmanResiduals:
    """Sup-norm residuals of P J = J, r + P V = J + V and P_star V = 0."""
    chain = induce_chain(m, p)
    gain_res = np.max(np.abs(chain.p_pi @ values.j - values.j))
    bias_res = np.max(np.abs(chain.r_pi + chain.p_pi @ values.v - values.j - values.v))
    norm_res = np.max(np.abs(values.p_star @ values.v))
    return BellmanResiduals(gain=float(gain_res), bias=float(bias_res), normalization=float(norm_res))


def gain(m: Mdp, p: Policy, mu: Distribution, c: Classification) -> float:
    """Scalar objective J_mu^pi = mu^T J^pi."""
    mu = as_distribution(mu, m.n_states)
    require_interior(p)
    chain = induce_chain(m, p)
    return float(mu @ (cesaro_from_matrix(chain.p_pi, c) @ chain.r_pi))


def performance_difference(
    m: Mdp,
    p: Policy,
    p2: Policy,
    mu: Distribution,
    c: Classification,
) -> PerformanceDifference:
    """Both sides of J_mu^pi - J_mu^pi' = visitation-weighted advantage sums.

    The right side weights (pi - pi')(.|s) against Q^pi' with d^pi_mu on
    recurrent states and against K^pi' with delta^pi_mu on transient states.

    Args:
        m: MDP
        p: First interior policy (pi)
        p2: Second interior policy (pi')
        mu: Full-support initial distribution
        c: Classification of ``m``

    Returns:
        PerformanceDifference
    """
    mu = as_distribution(mu, m.n_states, full_support=True)
    if p.table.shape != p2.table.shape:
        raise DimensionMismatchError(f"policy shapes differ: {p.table.shape} vs {p2.table.shape}")

    values = evaluate(m, p, c)
    values2 = evaluate(m, p2, c)
    vis = visitation(m, p, mu, c)

    advantage_q = np.sum((p.table - p2.table) * values2.q, axis=1)
    advantage_k = np.sum((p.table - p2.table) * values2.k, axis=1)
    recurrent = float(np.sum((vis.d * advantage_q)[c.recurrent_mask]))
    transient = float(np.sum((vis.delta * advantage_k)[c.transient_mask]))

    return PerformanceDifference(
        lhs=float(mu @ values.j - mu @ values2.j),
        rhs=recurrent + transient,
        recurrent_term=recurrent,
        transient_term=transient,
    )


def policy_gradient(m: Mdp, p: Policy, mu: Distribution, c: Classification) -> GradientTable:
    """Gradient of J_mu with respect to the direct parameters pi(a|s).

    grad(s, a) = d(s) Q(s, a) on recurrent states and delta(s) K(s, a) on
    transient ones. A distribution without full support is accepted but the
    result is flagged.
    """
    mu = as_distribution(mu, m.n_states)
    full_support = bool(np.all(mu > 0.0))
    if not full_support:
        logger.warning("Gradient requested with an initial distribution lacking full support")

    values = evaluate(m, p, c)
    vis = visitation(m, p, mu, c)
    grad = vis.rho[:, None] * values.g
    return GradientTable(grad=grad, full_support=full_support)


def finite_diff_directional(
    m: Mdp,
    p: Policy,
    mu: Distribution,
    u: TangentDirection,
    h: Optional[float] = None,
    c: Optional[Classification] = None,
) -> float:
    """Central difference (J_mu(p + h u) - J_mu(p - h u)) / 2h.

    Raises:
        StepTooLargeError: an endpoint leaves (0, 1)
        SupportError: an endpoint keeps a zero entry
    """
    h = settings.fd_step if h is None else h
    if h <= 0:
        raise ValueError(f"finite-difference step must be positive, got {h}")
    c = classify(m) if c is None else c

    plus = perturb_policy(p, u, h)
    minus = perturb_policy(p, u, -h)
    if not (plus.is_interior() and minus.is_interior()):
        raise SupportError("finite-difference endpoint lies outside the interior policies")
    return (gain(m, plus, mu, c) - gain(m, minus, mu, c)) / (2.0 * h)
