"""Tests for classification, Cesaro limits, visitation measures and chain constants."""

import numpy as np
import pytest

from multichain_pma.average_reward.core.chain_analysis import (
    canonical_decompose,
    cesaro_limit,
    chain_constants,
    classify,
    classify_chain,
    decompose_matrix,
    estimate_cover_time,
    exact_cover_time,
    expected_target_time,
    solve_block,
    target_time_report,
    transient_half_life,
    visitation,
)
from multichain_pma.average_reward.core.errors import (
    DimensionMismatchError,
    MdpError,
    SingularBlockError,
)
from multichain_pma.average_reward.core.mdp_core import induce_chain
from multichain_pma.average_reward.models import Classification, Policy


class TestClassify:
    """Test recurrent/transient classification."""

    def test_twochain(self, twochain_classes):
        """Test twochain has two absorbing classes and one transient state."""
        assert twochain_classes.recurrent_classes == [[1], [2]]
        assert twochain_classes.transient == [0]

    def test_planted_classes(self, multichain):
        """Test the generator's three planted classes are recovered."""
        c = classify(multichain)

        assert c.m == 3
        assert len(c.transient) == 2
        assert all(len(cls) == 2 for cls in c.recurrent_classes)

    def test_class_of(self, twochain_classes):
        """Test class lookup, with -1 for transient states."""
        assert [twochain_classes.class_of(s) for s in range(3)] == [-1, 0, 1]

    def test_ergodic_ring(self, ring):
        """Test an ergodic ring forms a single class with no transient states."""
        c = classify(ring)

        assert c.m == 1
        assert c.transient == []

    def test_classify_chain_requires_square(self):
        """Test a non-square matrix is rejected."""
        with pytest.raises(DimensionMismatchError):
            classify_chain(np.ones((2, 3)))

    def test_boundary_policy_changes_classes(self, twochain):
        """Test that a deterministic policy can produce a different structure."""
        chain = induce_chain(twochain, Policy.deterministic([0, 0, 0], 2))

        c = classify_chain(chain.p_pi)

        assert c.recurrent_classes == [[1], [2]]
        assert c.transient == [0]


class TestCesaroLimit:
    """Test the Cesaro limit and canonical blocks."""

    def test_twochain_half(self, twochain, twochain_policy, twochain_classes):
        """Test P_star for pi(L|0) = 0.5."""
        p_star = cesaro_limit(twochain, twochain_policy(0.5), twochain_classes)

        np.testing.assert_allclose(p_star, [[0.0, 0.5, 0.5], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]], atol=1e-14)

    def test_identities(self, multichain, rng):
        """Test P_star is stochastic and absorbs P^pi on both sides."""
        c = classify(multichain)
        p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.05)
        p_pi = induce_chain(multichain, p).p_pi

        p_star = cesaro_limit(multichain, p, c)

        np.testing.assert_allclose(p_star.sum(axis=1), 1.0, atol=1e-10)
        np.testing.assert_allclose(p_pi @ p_star, p_star, atol=1e-10)
        np.testing.assert_allclose(p_star @ p_pi, p_star, atol=1e-10)
        np.testing.assert_allclose(p_star[:, c.transient], 0.0, atol=1e-12)

    def test_canonical_permutation(self, multichain, rng):
        """Test classes come first in the canonical order and stationary vectors sum to one."""
        c = classify(multichain)
        p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.05)

        form = canonical_decompose(multichain, p, c)

        assert form.permutation[-len(c.transient):] == c.transient
        assert sorted(form.permutation) == list(range(multichain.n_states))
        for g in form.stationary:
            assert g.sum() == pytest.approx(1.0)
            assert np.all(g > 0.0)

    def test_open_class_rejected(self, twochain, twochain_policy):
        """Test that a class which leaks probability is reported."""
        p_pi = induce_chain(twochain, twochain_policy(0.5)).p_pi
        wrong = Classification(n_states=3, recurrent_classes=[[0, 1]], transient=[2])

        with pytest.raises(MdpError):
            decompose_matrix(p_pi, wrong)

    def test_singular_block(self):
        """Test a zero pivot raises SingularBlockError naming the block."""
        with pytest.raises(SingularBlockError) as info:
            solve_block(np.zeros((2, 2)), np.ones(2), "transient")

        assert info.value.block == "transient"


class TestVisitation:
    """Test the recurrent and transient visitation measures."""

    def test_twochain_uniform(self, twochain, twochain_policy, twochain_classes):
        """Test d, delta and rho for uniform mu and pi(L|0) = 0.5."""
        mu = np.full(3, 1.0 / 3.0)

        vis = visitation(twochain, twochain_policy(0.5), mu, twochain_classes)

        np.testing.assert_allclose(vis.d, [0.0, 0.5, 0.5], atol=1e-14)
        assert vis.delta[0] == pytest.approx(1.0 / 3.0)
        np.testing.assert_allclose(vis.rho, [1.0 / 3.0, 0.5, 0.5], atol=1e-14)

    def test_d_is_a_distribution(self, multichain, rng):
        """Test d sums to one and vanishes on transient states."""
        c = classify(multichain)
        p = Policy.random(rng, multichain.n_states, multichain.n_actions, 0.05)
        mu = rng.dirichlet(np.ones(multichain.n_states))

        vis = visitation(multichain, p, mu, c)

        assert vis.d.sum() == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(vis.d[c.transient], 0.0, atol=1e-12)
        assert np.all(vis.delta[c.transient] >= mu[c.transient] - 1e-12)


class TestChainConstants:
    """Test target time, half-life and cover time."""

    def test_cycle_target_and_cover(self, cycle3):
        """Test the deterministic 3-cycle: target time 1, cover time 3."""
        block = induce_chain(cycle3, Policy.uniform(3, 1)).p_pi
        g = np.full(3, 1.0 / 3.0)

        assert expected_target_time(block, g) == pytest.approx(1.0)
        assert exact_cover_time(block) == pytest.approx(3.0)

    def test_single_state_class(self):
        """Test a one-state class has target time 0 and cover time 1."""
        block = np.ones((1, 1))

        assert expected_target_time(block, np.ones(1)) == 0.0
        assert exact_cover_time(block) == 1.0

    def test_monte_carlo_cover_on_cycle(self, cycle3):
        """Test the estimate is exact with zero error on a deterministic cycle."""
        block = induce_chain(cycle3, Policy.uniform(3, 1)).p_pi

        value, err = estimate_cover_time(block, 0, episodes=20, seed=0)

        assert value == pytest.approx(3.0)
        assert err == 0.0

    @pytest.mark.parametrize(
        "t_block, expected",
        [
            (np.zeros((0, 0)), 0),
            (np.array([[0.5]]), 1),
            (np.array([[0.9]]), 7),
            (np.array([[0.0, 1.0], [0.0, 0.0]]), 2),
        ],
    )
    def test_transient_half_life(self, t_block, expected):
        """Test the smallest t with ||T^t||_inf <= 1/2."""
        assert transient_half_life(t_block) == expected

    def test_ring_constants_are_exact(self, ring):
        """Test small classes use the exact cover time."""
        c = classify(ring)

        constants = chain_constants(ring, Policy.uniform(ring.n_states, ring.n_actions), c)

        assert constants.t_half == 0
        assert constants.t_cov_estimated == [False]
        assert constants.t_cov >= ring.n_states
        assert constants.t_tar > 0.0

    def test_target_time_bound_holds(self, ring, rng):
        """Test Cesaro averages stay within 2 t_tar / k on the ring."""
        c = classify(ring)
        p = Policy.random(rng, ring.n_states, ring.n_actions, 0.1)

        rows = target_time_report(ring, p, c, ks=(1, 10, 100))

        assert len(rows) == 3 * ring.n_states
        assert all(row.holds for row in rows)
