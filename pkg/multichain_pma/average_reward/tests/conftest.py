"""Shared fixtures for the multichain_pma test suite."""

import numpy as np
import pytest

from multichain_pma.average_reward.core.chain_analysis import classify
from multichain_pma.average_reward.models import FixtureName, Mdp, Policy
from multichain_pma.average_reward.utils.fixtures import gen_fixture


def _twochain_policy(p_left: float) -> Policy:
    table = np.full((3, 2), 0.5)
    table[0] = [p_left, 1.0 - p_left]
    return Policy(table=table)


@pytest.fixture
def twochain() -> Mdp:
    return gen_fixture(FixtureName.TWOCHAIN)


@pytest.fixture
def twochain_policy():
    """Factory: L with probability p_left in state 0, uniform elsewhere."""
    return _twochain_policy


@pytest.fixture
def twochain_classes(twochain):
    return classify(twochain)


@pytest.fixture
def multichain() -> Mdp:
    """Three planted classes of two states plus two transient states."""
    return gen_fixture(FixtureName.RANDOM_MULTICHAIN, {"sizes": [2, 2, 2], "transient": 2}, seed=7)


@pytest.fixture
def weakly_comm() -> Mdp:
    return gen_fixture(FixtureName.WEAKLY_COMM, seed=3)


@pytest.fixture
def ring() -> Mdp:
    return gen_fixture(FixtureName.ERGODIC_RING, {"n": 5}, seed=1)


@pytest.fixture
def cycle3() -> Mdp:
    """Deterministic 3-cycle with a single action."""
    kernel = np.zeros((3, 1, 3))
    for s in range(3):
        kernel[s, 0, (s + 1) % 3] = 1.0
    return Mdp.from_arrays(kernel, np.zeros((3, 1)), reward_bound=1.0)


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(12345)
