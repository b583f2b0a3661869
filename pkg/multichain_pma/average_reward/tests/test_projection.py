"""Tests for divergences, floored-simplex projections and mirror steps."""

import numpy as np
import pytest
from hypothesis import given, settings as hyp_settings
from hypothesis import strategies as st

from multichain_pma.average_reward.core.errors import (
    InfeasibleConfigError,
    ProjectionError,
    SupportError,
)
from multichain_pma.average_reward.core.oracles import brute_force_project
from multichain_pma.average_reward.core.projection import (
    divergence,
    euclid_project_floor,
    kl_project_floor,
    mirror_step,
    mirror_table,
)
from multichain_pma.average_reward.models import DivergenceKind, FlooredSimplexPoint


@st.composite
def euclid_case(draw):
    d = draw(st.integers(min_value=1, max_value=8))
    q = draw(st.lists(st.floats(-3.0, 3.0, allow_nan=False), min_size=d, max_size=d))
    frac = draw(st.floats(0.0, 0.99))
    return np.array(q), frac / d


@st.composite
def kl_case(draw):
    d = draw(st.integers(min_value=1, max_value=8))
    raw = np.array(draw(st.lists(st.floats(1e-3, 1.0), min_size=d, max_size=d)))
    frac = draw(st.floats(0.0, 0.99))
    return raw / raw.sum(), frac / d


class TestDivergence:
    """Test the two Bregman divergences."""

    def test_euclidean(self):
        """Test 0.5 ||p - p'||^2."""
        assert divergence(DivergenceKind.EUCLIDEAN, [1.0, 0.0], [0.5, 0.5]) == pytest.approx(0.25)

    def test_kl(self):
        """Test KL against a hand computation."""
        expected = 0.5 * np.log(0.5 / 0.25) + 0.5 * np.log(0.5 / 0.75)
        assert divergence(DivergenceKind.KL, [0.5, 0.5], [0.25, 0.75]) == pytest.approx(expected)

    def test_kl_zero_entries_in_first_argument(self):
        """Test 0 log 0 = 0."""
        assert divergence(DivergenceKind.KL, [1.0, 0.0], [0.5, 0.5]) == pytest.approx(np.log(2.0))

    def test_kl_undefined(self):
        """Test mass where the second argument vanishes raises SupportError."""
        with pytest.raises(SupportError):
            divergence(DivergenceKind.KL, [0.5, 0.5], [1.0, 0.0])


class TestEuclidProjection:
    """Test the sort-based Euclidean projection."""

    @pytest.mark.parametrize("q", [[1.0, 0.0], [0.9, 0.1]])
    def test_worked_values(self, q):
        """Test both inputs project to (0.8, 0.2) at alpha = 0.2."""
        point = euclid_project_floor(np.array(q), 0.2)

        np.testing.assert_allclose(point.p, [0.8, 0.2], atol=1e-15)

    def test_interior_point_unchanged(self):
        """Test a feasible point is its own projection."""
        q = np.array([0.2, 0.3, 0.5])

        np.testing.assert_allclose(euclid_project_floor(q, 0.1).p, q, atol=1e-15)

    def test_singleton_floor(self):
        """Test alpha = 1/d returns the uniform vector."""
        np.testing.assert_allclose(euclid_project_floor(np.array([5.0, -1.0, 0.0, 2.0]), 0.25).p, 0.25)

    def test_empty_feasible_set(self):
        """Test alpha > 1/d raises ProjectionError."""
        with pytest.raises(ProjectionError):
            euclid_project_floor(np.array([0.5, 0.5]), 0.6)

    @hyp_settings(max_examples=200, deadline=None)
    @given(euclid_case())
    def test_matches_enumeration(self, case):
        """Test against enumeration of clipped sets."""
        q, alpha = case

        point = euclid_project_floor(q, alpha)

        np.testing.assert_allclose(point.p, brute_force_project(DivergenceKind.EUCLIDEAN, q, alpha), atol=1e-8)
        assert point.p.min() >= alpha - 1e-12
        assert point.p.sum() == pytest.approx(1.0, abs=1e-12)


class TestKlProjection:
    """Test the median-pivot KL projection."""

    def test_clips_small_weight(self):
        """Test (0.9, 0.1) at alpha = 0.2 clips the second coordinate."""
        np.testing.assert_allclose(kl_project_floor(np.array([0.9, 0.1]), 0.2).p, [0.8, 0.2], atol=1e-15)

    def test_zero_floor_is_identity(self):
        """Test alpha = 0 returns the weights."""
        w = np.array([0.1, 0.2, 0.7])

        np.testing.assert_allclose(kl_project_floor(w, 0.0).p, w)

    def test_rejects_zero_weight(self):
        """Test nonpositive weights raise ProjectionError."""
        with pytest.raises(ProjectionError):
            kl_project_floor(np.array([1.0, 0.0]), 0.1)

    def test_rejects_unnormalized_weights(self):
        """Test weights must sum to one."""
        with pytest.raises(ProjectionError):
            kl_project_floor(np.array([0.5, 0.6]), 0.1)

    @hyp_settings(max_examples=200, deadline=None)
    @given(kl_case())
    def test_matches_enumeration(self, case):
        """Test against enumeration of clipped sets."""
        w, alpha = case

        point = kl_project_floor(w, alpha)

        np.testing.assert_allclose(point.p, brute_force_project(DivergenceKind.KL, w, alpha), atol=1e-8)
        assert point.p.min() >= alpha - 1e-12

    def test_clipped_set_is_a_lower_set(self):
        """Test the clipped coordinates are those with the smallest weights."""
        w = np.array([0.01, 0.02, 0.07, 0.3, 0.6])

        p = kl_project_floor(w, 0.1).p
        clipped = np.isclose(p, 0.1)

        assert clipped[:3].all() and not clipped[3:].any()


class TestMirrorStep:
    """Test the per-state mirror update."""

    def test_euclidean_small_step(self):
        """Test (0.5, 0.5) with g = (1, 0) and eta = 0.1 moves to (0.55, 0.45)."""
        row = FlooredSimplexPoint(p=[0.5, 0.5], alpha=0.0)

        nxt = mirror_step(row, np.array([1.0, 0.0]), 0.1, DivergenceKind.EUCLIDEAN)

        np.testing.assert_allclose(nxt.p, [0.55, 0.45], atol=1e-15)

    @pytest.mark.parametrize("kind", list(DivergenceKind))
    def test_large_step_reaches_clipped_vertex(self, kind):
        """Test a huge step lands on the alpha-clipped greedy vertex."""
        row = FlooredSimplexPoint(p=[0.3, 0.3, 0.4], alpha=0.05)

        nxt = mirror_step(row, np.array([0.0, 2.0, 1.0]), 1e6, kind)

        np.testing.assert_allclose(nxt.p, [0.05, 0.9, 0.05], atol=1e-9)

    def test_kl_step_is_multiplicative(self):
        """Test an unclipped KL step is proportional to p exp(eta g)."""
        row = FlooredSimplexPoint(p=[0.5, 0.5], alpha=0.0)

        nxt = mirror_step(row, np.array([np.log(3.0), 0.0]), 1.0, DivergenceKind.KL)

        np.testing.assert_allclose(nxt.p, [0.75, 0.25], atol=1e-14)

    def test_non_positive_step(self):
        """Test eta <= 0 raises InfeasibleConfigError."""
        row = FlooredSimplexPoint(p=[0.5, 0.5], alpha=0.0)

        with pytest.raises(InfeasibleConfigError):
            mirror_step(row, np.zeros(2), 0.0, DivergenceKind.KL)

    def test_table_rows_stay_in_floor(self, rng):
        """Test every updated row lies in the floored simplex."""
        table = rng.dirichlet(np.ones(3), size=4) * 0.7 + 0.1
        g = rng.standard_normal((4, 3))

        out = mirror_table(table, g, 2.0, DivergenceKind.KL, alpha=0.1)

        np.testing.assert_allclose(out.sum(axis=1), 1.0, atol=1e-12)
        assert out.min() >= 0.1 - 1e-12
