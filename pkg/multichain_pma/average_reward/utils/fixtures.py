"""Seeded generators for the built-in MDP families."""

from typing import Any, Callable, Dict, List, Mapping, Optional

import numpy as np

from ...shared.config import settings
from ...shared.logging import get_logger
from ..core.errors import InfeasibleConfigError
from ..models.experiment import FixtureName
from ..models.mdp import Mdp
from .streams import keyed_generator

logger = get_logger(__name__)

# stream key prefix per family
_FAMILY_KEYS = {
    FixtureName.TWOCHAIN: 0,
    FixtureName.RANDOM_MULTICHAIN: 1,
    FixtureName.WEAKLY_COMM: 2,
    FixtureName.ERGODIC_RING: 3,
}


def _take(params: Dict[str, Any], defaults: Mapping[str, Any], family: FixtureName) -> Dict[str, Any]:
    unknown = sorted(set(params) - set(defaults))
    if unknown:
        raise InfeasibleConfigError(f"unknown parameters for {family.value}: {unknown} (allowed {sorted(defaults)})")
    merged = dict(defaults)
    merged.update(params)
    return merged


def _require(condition: bool, message: str) -> None:
    if not condition:
        raise InfeasibleConfigError(message)


def twochain(params: Dict[str, Any], rng: np.random.Generator) -> Mdp:
    """Three states, two actions: from 0, L goes to 1 and R goes to 2.

    States 1 and 2 are absorbing under both actions and only state 1 pays
    reward 1, so J^pi(0) = pi(L|0).
    """
    _take(params, {}, FixtureName.TWOCHAIN)
    kernel = np.zeros((3, 2, 3))
    kernel[0, 0, 1] = 1.0
    kernel[0, 1, 2] = 1.0
    kernel[1, :, 1] = 1.0
    kernel[2, :, 2] = 1.0
    reward = np.zeros((3, 2))
    reward[1, :] = 1.0
    return Mdp.from_arrays(kernel, reward, reward_bound=1.0)


def random_multichain(params: Dict[str, Any], rng: np.random.Generator) -> Mdp:
    """Planted recurrent classes with Dirichlet rows, plus transient states.

    Every action keeps a class state inside its class, so each class stays
    closed under every policy. Transient rows send at least ``leak`` of their
    mass to the recurrent states under every action.

    Params:
        sizes: Class sizes (default [2, 2])
        transient: Number of transient states (default 2)
        n_actions: Actions per state (default 2)
        leak: Mass leaving the transient set, in (0, 1] (default 0.3)
        concentration: Dirichlet concentration (default 1.0)
        shuffle: Randomly relabel the states (default 1)
    """
    p = _take(
        params,
        {"sizes": [2, 2], "transient": 2, "n_actions": 2, "leak": 0.3, "concentration": 1.0, "shuffle": 1},
        FixtureName.RANDOM_MULTICHAIN,
    )
    sizes: List[int] = [int(x) for x in np.atleast_1d(p["sizes"])]
    n_transient, n_actions = int(p["transient"]), int(p["n_actions"])
    leak, conc = float(p["leak"]), float(p["concentration"])
    _require(len(sizes) > 0 and all(x > 0 for x in sizes), f"class sizes must be positive, got {sizes}")
    _require(n_transient >= 0, f"transient count must be nonnegative, got {n_transient}")
    _require(n_actions > 0, f"n_actions must be positive, got {n_actions}")
    _require(0.0 < leak <= 1.0, f"leak must lie in (0, 1], got {leak}")
    _require(conc > 0.0, f"concentration must be positive, got {conc}")

    n_recurrent = sum(sizes)
    n = n_recurrent + n_transient
    kernel = np.zeros((n, n_actions, n))

    start = 0
    for size in sizes:
        block = slice(start, start + size)
        kernel[block, :, block] = rng.dirichlet(np.full(size, conc), size=(size, n_actions))
        start += size

    if n_transient:
        t = slice(n_recurrent, n)
        inside = rng.dirichlet(np.full(n_transient, conc), size=(n_transient, n_actions))
        outside = rng.dirichlet(np.full(n_recurrent, conc), size=(n_transient, n_actions))
        kernel[t, :, t] = (1.0 - leak) * inside
        kernel[t, :, :n_recurrent] = leak * outside

    reward = rng.uniform(-1.0, 1.0, size=(n, n_actions))

    if int(p["shuffle"]):
        perm = rng.permutation(n)
        inverse = np.argsort(perm)
        kernel = kernel[inverse][:, :, inverse]
        reward = reward[inverse]

    return Mdp.from_arrays(kernel, reward, reward_bound=1.0)


def weakly_comm(params: Dict[str, Any], rng: np.random.Generator) -> Mdp:
    """A communicating core plus a transient fringe.

    On the core, action 0 stays put and action 1 moves to the next core
    state; further actions draw Dirichlet rows on the core. Fringe states
    leak at least ``leak`` of their mass into the core under every action.

    Params:
        n_closed: Core size (default 3)
        n_fringe: Fringe size (default 2)
        n_actions: Actions per state, at least 2 (default 2)
        leak: Mass leaving the fringe, in (0, 1] (default 0.5)
    """
    p = _take(params, {"n_closed": 3, "n_fringe": 2, "n_actions": 2, "leak": 0.5}, FixtureName.WEAKLY_COMM)
    n_closed, n_fringe, n_actions, leak = int(p["n_closed"]), int(p["n_fringe"]), int(p["n_actions"]), float(p["leak"])
    _require(n_closed > 0, f"n_closed must be positive, got {n_closed}")
    _require(n_fringe >= 0, f"n_fringe must be nonnegative, got {n_fringe}")
    _require(n_actions >= 2, f"weakly_comm needs at least 2 actions, got {n_actions}")
    _require(0.0 < leak <= 1.0, f"leak must lie in (0, 1], got {leak}")

    n = n_closed + n_fringe
    kernel = np.zeros((n, n_actions, n))
    core = np.arange(n_closed)
    kernel[core, 0, core] = 1.0
    kernel[core, 1, (core + 1) % n_closed] = 1.0
    if n_actions > 2:
        kernel[:n_closed, 2:, :n_closed] = rng.dirichlet(np.ones(n_closed), size=(n_closed, n_actions - 2))

    if n_fringe:
        inside = rng.dirichlet(np.ones(n_fringe), size=(n_fringe, n_actions))
        outside = rng.dirichlet(np.ones(n_closed), size=(n_fringe, n_actions))
        kernel[n_closed:, :, n_closed:] = (1.0 - leak) * inside
        kernel[n_closed:, :, :n_closed] = leak * outside

    reward = rng.uniform(0.0, 1.0, size=(n, n_actions))
    return Mdp.from_arrays(kernel, reward, reward_bound=1.0)


def ergodic_ring(params: Dict[str, Any], rng: np.random.Generator) -> Mdp:
    """Ring where action a moves a + 1 steps ahead, mixed with uniform noise.

    Params:
        n: Number of states (default 5)
        n_actions: Actions per state (default 2)
        noise: Uniform mixing weight in (0, 1] (default 0.1)
    """
    p = _take(params, {"n": 5, "n_actions": 2, "noise": 0.1}, FixtureName.ERGODIC_RING)
    n, n_actions, noise = int(p["n"]), int(p["n_actions"]), float(p["noise"])
    _require(n > 0, f"n must be positive, got {n}")
    _require(n_actions > 0, f"n_actions must be positive, got {n_actions}")
    _require(0.0 < noise <= 1.0, f"noise must lie in (0, 1], got {noise}")

    kernel = np.full((n, n_actions, n), noise / n)
    states = np.arange(n)
    for a in range(n_actions):
        kernel[states, a, (states + a + 1) % n] += 1.0 - noise

    reward = rng.uniform(0.0, 1.0, size=(n, n_actions))
    return Mdp.from_arrays(kernel, reward, reward_bound=1.0)


_GENERATORS: Dict[FixtureName, Callable[[Dict[str, Any], np.random.Generator], Mdp]] = {
    FixtureName.TWOCHAIN: twochain,
    FixtureName.RANDOM_MULTICHAIN: random_multichain,
    FixtureName.WEAKLY_COMM: weakly_comm,
    FixtureName.ERGODIC_RING: ergodic_ring,
}


def gen_fixture(name: FixtureName, params: Optional[Dict[str, Any]] = None, seed: Optional[int] = None) -> Mdp:
    """Build a named fixture MDP.

    Args:
        name: Fixture family
        params: Family parameters (see each generator)
        seed: Root seed (``settings.default_seed`` when None)

    Returns:
        Mdp

    Raises:
        InfeasibleConfigError: Unknown or inconsistent parameters
    """
    try:
        family = FixtureName(name)
    except ValueError as exc:
        raise InfeasibleConfigError(f"unknown fixture {name!r}; choose from {[f.value for f in FixtureName]}") from exc
    seed = settings.default_seed if seed is None else int(seed)
    rng = keyed_generator(seed, (_FAMILY_KEYS[family],))
    m = _GENERATORS[family](dict(params or {}), rng)
    logger.debug(f"Generated {family.value}: |S|={m.n_states}, |A|={m.n_actions}, seed={seed}")
    return m
