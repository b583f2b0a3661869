"""Tests for the property suites behind the check command."""

import pytest

from multichain_pma.average_reward.core.errors import InfeasibleConfigError
from multichain_pma.average_reward.models import CheckSuite
from multichain_pma.average_reward.utils.checks import random_case, run_suite


class TestRunSuite:
    """Test suite dispatch and small suite runs."""

    @pytest.mark.parametrize(
        "suite, params",
        [
            (CheckSuite.PROJ, {"n_cases": 50}),
            (CheckSuite.BELLMAN, {"n_cases": 5}),
            (CheckSuite.PDL, {"n_cases": 2, "n_pairs": 5}),
            (CheckSuite.GRAD, {"n_cases": 5}),
            (CheckSuite.TARGET, {}),
            (CheckSuite.CRITIC, {"n_seeds": 5, "n": 20, "horizon": 50}),
        ],
    )
    def test_small_suites_pass(self, suite, params):
        """Test reduced-size suites pass with the default seed."""
        report = run_suite(suite, seed=0, **params)

        assert report.passed, [a.name for a in report.failures]
        assert report.assertions

    def test_critic_suite_is_exact_on_twochain(self):
        """Test sample accounting and replay are exact."""
        report = run_suite(CheckSuite.CRITIC, seed=1, n_seeds=2, n=5, horizon=20)
        measured = {a.name: a.measured for a in report.assertions}

        assert measured["sample_accounting"] == 0
        assert measured["replay_difference"] == 0.0

    def test_unknown_parameter(self):
        """Test a parameter the suite does not take is rejected."""
        with pytest.raises(InfeasibleConfigError):
            run_suite(CheckSuite.PROJ, n_iters=3)

    def test_unknown_suite(self):
        """Test an unknown suite name is rejected."""
        with pytest.raises(InfeasibleConfigError):
            run_suite("nope")

    def test_random_cases_are_keyed(self):
        """Test the same seed and key give the same case."""
        first = random_case(4, 0, 1)
        second = random_case(4, 0, 1)

        assert first.n_states == second.n_states
        assert (first.kernel == second.kernel).all()

    @pytest.mark.slow
    def test_classify_suite(self):
        """Test sampled classification with suggested windows."""
        report = run_suite(CheckSuite.CLASSIFY, seed=0, n_seeds=5)

        assert report.passed, [a.name for a in report.failures]

    @pytest.mark.slow
    def test_weak_suite(self):
        """Test the eps = 0.05 floor and iteration count give eps-optimal policies on both fixtures."""
        report = run_suite(CheckSuite.WEAK, seed=0)
        measured = {a.name: a for a in report.assertions}

        assert report.passed, [a.name for a in report.failures]
        assert measured["weakly_comm_optimality_gap"].threshold == 0.05
        assert measured["ergodic_ring_reference_gap"].threshold == 0.025

    def test_weak_suite_is_registered(self):
        """Test the weak suite validates its parameters like the others."""
        with pytest.raises(InfeasibleConfigError):
            run_suite("weak", iters=3)
