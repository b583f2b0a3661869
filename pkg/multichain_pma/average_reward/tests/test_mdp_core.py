"""Tests for MDP and policy validation, induced chains and tangent steps."""

import numpy as np
import pytest
from pydantic import ValidationError

from multichain_pma.average_reward.core.errors import (
    DimensionMismatchError,
    MdpError,
    StepTooLargeError,
    SupportError,
)
from multichain_pma.average_reward.core.mdp_core import (
    as_distribution,
    induce_chain,
    perturb_policy,
    require_interior,
    uniform_distribution,
    validate_mdp,
    validate_policy,
)
from multichain_pma.average_reward.models import Mdp, Policy, TangentDirection


class TestValidateMdp:
    """Test MDP validation reports."""

    def test_twochain_is_valid(self, twochain):
        """Test that the twochain fixture produces an empty report."""
        report = validate_mdp(twochain)

        assert report.ok
        assert report.messages() == []

    def test_with_reward_keeps_kernel(self, twochain):
        """Test swapping the reward table leaves the dynamics alone."""
        scaled = twochain.with_reward(2.0 * twochain.reward, 2.0)

        np.testing.assert_array_equal(scaled.kernel, twochain.kernel)
        np.testing.assert_array_equal(scaled.reward, 2.0 * twochain.reward)
        assert scaled.reward_bound == 2.0
        assert validate_mdp(scaled).ok

    def test_row_sum_violation(self):
        """Test a row summing to 0.9 is reported with its (s, a)."""
        kernel = np.array([[[1.0, 0.0], [0.5, 0.5]], [[0.0, 0.9], [0.0, 1.0]]])
        m = Mdp.from_arrays(kernel, np.zeros((2, 2)), reward_bound=1.0)

        report = validate_mdp(m)

        assert not report.ok
        assert [(v.kind, v.state, v.action) for v in report.violations] == [("row_sum", 1, 0)]

    def test_negative_entry_and_reward_bound(self):
        """Test that negative probabilities and rewards above R are both listed."""
        kernel = np.array([[[1.2, -0.2]], [[0.0, 1.0]]])
        reward = np.array([[2.0], [0.0]])
        m = Mdp.from_arrays(kernel, reward, reward_bound=1.0)

        kinds = sorted(v.kind for v in validate_mdp(m).violations)

        assert kinds == ["negative", "reward_bound"]

    def test_non_finite_entry(self):
        """Test that NaN entries are reported rather than raising."""
        kernel = np.array([[[np.nan, 1.0]], [[0.0, 1.0]]])
        m = Mdp.from_arrays(kernel, np.zeros((2, 1)), reward_bound=1.0)

        assert "non_finite" in {v.kind for v in validate_mdp(m).violations}

    def test_shape_mismatch_rejected_by_model(self):
        """Test that inconsistent array shapes fail at construction."""
        with pytest.raises(ValidationError):
            Mdp(n_states=2, n_actions=1, kernel=np.ones((2, 2, 2)) / 2, reward=np.zeros((2, 1)), reward_bound=1.0)


class TestPolicies:
    """Test policy construction and checks."""

    def test_deterministic_clipped_vertex(self):
        """Test the alpha-clipped vertex puts 1 - (|A| - 1) alpha on the chosen action."""
        p = Policy.deterministic([1, 0], n_actions=3, alpha=0.1)

        np.testing.assert_allclose(p.table, [[0.1, 0.8, 0.1], [0.8, 0.1, 0.1]])
        assert p.in_floor(0.1)

    def test_random_policy_respects_floor(self, rng):
        """Test random Pi_alpha policies keep every entry above alpha."""
        p = Policy.random(rng, 4, 3, alpha=0.2)

        assert p.in_floor(0.2)
        np.testing.assert_allclose(p.table.sum(axis=1), 1.0)

    def test_row_sum_rejected(self):
        """Test that a non-stochastic table is rejected."""
        with pytest.raises(ValidationError):
            Policy(table=[[0.6, 0.6]])

    def test_validate_policy_shape(self, twochain):
        """Test that a policy of the wrong shape raises DimensionMismatchError."""
        with pytest.raises(DimensionMismatchError):
            validate_policy(twochain, Policy.uniform(2, 2))

    def test_require_interior(self, twochain):
        """Test boundary policies raise SupportError."""
        with pytest.raises(SupportError):
            require_interior(Policy.deterministic([0, 0, 0], 2))


class TestInducedChain:
    """Test the induced chain P^pi, r^pi and Theta."""

    def test_twochain_half(self, twochain, twochain_policy):
        """Test P^pi and r^pi for pi(L|0) = 0.5."""
        chain = induce_chain(twochain, twochain_policy(0.5))

        np.testing.assert_allclose(chain.p_pi, [[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]])
        np.testing.assert_allclose(chain.r_pi, [0.0, 1.0, 0.0])

    def test_theta_reproduces_p_pi(self, multichain, rng):
        """Test that Theta_pi times the flat kernel equals P^pi."""
        p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.05)
        chain = induce_chain(multichain, p)

        np.testing.assert_allclose(chain.theta_pi @ multichain.flat_kernel, chain.p_pi, atol=1e-15)


class TestPerturbPolicy:
    """Test moves along tangent directions."""

    def test_zero_step_returns_same_policy(self, twochain_policy):
        """Test that t = 0 returns the input unchanged."""
        p = twochain_policy(0.3)
        u = TangentDirection(table=[[1.0, -1.0], [0.0, 0.0], [0.0, 0.0]])

        assert perturb_policy(p, u, 0.0) is p

    def test_step_moves_entries(self, twochain_policy):
        """Test p + t u on the moved row."""
        u = TangentDirection(table=[[1.0, -1.0], [0.0, 0.0], [0.0, 0.0]])

        moved = perturb_policy(twochain_policy(0.3), u, 0.2)

        np.testing.assert_allclose(moved.table[0], [0.5, 0.5])

    def test_step_too_large(self, twochain_policy):
        """Test a step leaving (0, 1) raises StepTooLargeError naming the entry."""
        u = TangentDirection(table=[[1.0, -1.0], [0.0, 0.0], [0.0, 0.0]])

        with pytest.raises(StepTooLargeError) as info:
            perturb_policy(twochain_policy(0.3), u, 0.7)

        assert (info.value.state, info.value.action) == (0, 0)


class TestDistributions:
    """Test initial-distribution coercion."""

    def test_full_support_required(self):
        """Test zero mass is rejected when full support is asked for."""
        with pytest.raises(SupportError):
            as_distribution([0.5, 0.5, 0.0], 3, full_support=True)

    def test_not_a_distribution(self):
        """Test vectors that do not sum to one raise MdpError."""
        with pytest.raises(MdpError):
            as_distribution([0.5, 0.6], 2)

    def test_uniform_distribution(self):
        """Test the uniform vector is a full-support distribution."""
        mu = uniform_distribution(4)

        np.testing.assert_array_equal(as_distribution(mu, 4, full_support=True), [0.25] * 4)
        assert uniform_distribution.__doc__
