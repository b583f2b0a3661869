"""Tests for exact evaluation, the performance difference identity and the policy gradient."""

import numpy as np
import pytest

from multichain_pma.average_reward.core.chain_analysis import classify
from multichain_pma.average_reward.core.errors import SupportError
from multichain_pma.average_reward.core.values import (
    bellman_residuals,
    evaluate,
    evaluate_any,
    finite_diff_directional,
    gain,
    performance_difference,
    policy_gradient,
)
from multichain_pma.average_reward.models import Policy, TangentDirection

UNIFORM3 = np.full(3, 1.0 / 3.0)


class TestEvaluate:
    """Test gain, bias and action values."""

    def test_twochain_half(self, twochain, twochain_policy, twochain_classes):
        """Test J, V, K, Q and G on twochain with pi(L|0) = 0.5."""
        values = evaluate(twochain, twochain_policy(0.5), twochain_classes)

        np.testing.assert_allclose(values.j, [0.5, 1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(values.v, [-0.5, 0.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(values.k, [[1.0, 0.0], [1.0, 1.0], [0.0, 0.0]], atol=1e-12)
        np.testing.assert_allclose(values.q[0], [-1.0, 0.0], atol=1e-12)
        np.testing.assert_allclose(values.g, [[1.0, 0.0], [0.0, 0.0], [0.0, 0.0]], atol=1e-12)

    def test_gain_is_linear_in_left_probability(self, twochain, twochain_policy, twochain_classes):
        """Test J(0) = pi(L|0) on twochain."""
        for p_left in (0.1, 0.37, 0.9):
            values = evaluate(twochain, twochain_policy(p_left), twochain_classes)
            assert values.j[0] == pytest.approx(p_left)

    def test_bellman_residuals(self, multichain, rng):
        """Test the Bellman and normalization equations hold to tolerance."""
        c = classify(multichain)
        for _ in range(5):
            p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.02)
            values = evaluate(multichain, p, c)
            assert bellman_residuals(multichain, p, values).within(1e-9)

    def test_gain_constant_on_each_class(self, multichain, rng):
        """Test J is constant on every recurrent class."""
        c = classify(multichain)
        values = evaluate(multichain, Policy.random(rng, multichain.n_states, multichain.n_actions), c)

        for cls in c.recurrent_classes:
            assert np.ptp(values.j[cls]) < 1e-10

    def test_boundary_policy_rejected(self, twochain, twochain_classes):
        """Test evaluate requires an interior policy."""
        with pytest.raises(SupportError):
            evaluate(twochain, Policy.deterministic([0, 0, 0], 2), twochain_classes)

    def test_evaluate_any_boundary(self, twochain):
        """Test a deterministic policy is evaluated on its own chain."""
        values = evaluate_any(twochain, Policy.deterministic([0, 0, 0], 2))

        np.testing.assert_allclose(values.j, [1.0, 1.0, 0.0], atol=1e-12)


class TestPerformanceDifference:
    """Test the multichain performance difference identity."""

    def test_random_pairs(self, multichain, rng):
        """Test lhs equals the visitation-weighted advantage sum."""
        c = classify(multichain)
        mu = rng.dirichlet(np.ones(multichain.n_states))
        for _ in range(10):
            p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.01)
            p2 = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.01)
            pd = performance_difference(multichain, p, p2, mu, c)
            assert pd.gap <= 1e-8

    def test_twochain_transient_term(self, twochain, twochain_policy, twochain_classes):
        """Test the whole difference sits in the transient term on twochain."""
        pd = performance_difference(twochain, twochain_policy(0.8), twochain_policy(0.3), UNIFORM3, twochain_classes)

        assert pd.lhs == pytest.approx(0.5 / 3.0)
        assert pd.transient_term == pytest.approx(0.5 / 3.0)
        assert pd.recurrent_term == pytest.approx(0.0, abs=1e-12)

    def test_requires_full_support(self, twochain, twochain_policy, twochain_classes):
        """Test mu with a zero entry is rejected."""
        with pytest.raises(SupportError):
            performance_difference(
                twochain, twochain_policy(0.8), twochain_policy(0.3), [0.0, 0.5, 0.5], twochain_classes
            )


class TestPolicyGradient:
    """Test the direct-parameter gradient."""

    def test_twochain_gradient(self, twochain, twochain_policy, twochain_classes):
        """Test grad = rho * G on twochain with uniform mu."""
        table = policy_gradient(twochain, twochain_policy(0.5), UNIFORM3, twochain_classes)

        np.testing.assert_allclose(table.grad, [[1.0 / 3.0, 0.0], [0.0, 0.0], [0.0, 0.0]], atol=1e-12)
        assert table.full_support

    def test_partial_support_flagged(self, twochain, twochain_policy, twochain_classes):
        """Test a distribution with a zero entry is accepted but flagged."""
        table = policy_gradient(twochain, twochain_policy(0.5), [0.0, 0.5, 0.5], twochain_classes)

        assert not table.full_support

    def test_matches_finite_differences(self, multichain, rng):
        """Test directional derivatives against central differences."""
        c = classify(multichain)
        mu = rng.dirichlet(np.ones(multichain.n_states))
        p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.1)
        grad = policy_gradient(multichain, p, mu, c)

        for _ in range(5):
            u = TangentDirection.random(rng, multichain.n_states, multichain.n_actions)
            numeric = finite_diff_directional(multichain, p, mu, u, h=1e-5, c=c)
            analytic = grad.directional(u.table)
            assert analytic == pytest.approx(numeric, rel=1e-5, abs=1e-9)

    def test_gain_matches_evaluate(self, twochain, twochain_policy, twochain_classes):
        """Test J_mu is mu^T J."""
        assert gain(twochain, twochain_policy(0.25), UNIFORM3, twochain_classes) == pytest.approx(
            (0.25 + 1.0) / 3.0
        )

    def test_non_positive_step_rejected(self, twochain, twochain_policy):
        """Test h <= 0 is rejected."""
        u = TangentDirection(table=[[1.0, -1.0], [0.0, 0.0], [0.0, 0.0]])

        with pytest.raises(ValueError):
            finite_diff_directional(twochain, twochain_policy(0.5), UNIFORM3, u, h=0.0)
