"""MDP, policy and induced-chain data models."""

from typing import List, Optional, Sequence

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ...shared.config import settings
from .arrays import frozen_array


class Mdp(BaseModel):
    """Finite average-reward MDP with deterministic rewards.

    The model only checks that array shapes agree; probability and reward-bound
    violations are reported by ``validate_mdp`` so that a broken file can still
    be loaded and diagnosed.
    """

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    n_states: int = Field(..., gt=0, description="Number of states |S|")
    n_actions: int = Field(..., gt=0, description="Number of actions |A|")
    kernel: np.ndarray = Field(..., description="Transition tensor P[s][a][s']")
    reward: np.ndarray = Field(..., description="Reward table r[s][a]")
    reward_bound: float = Field(..., ge=0.0, description="Declared bound R on |r|")

    @field_validator("kernel", "reward", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    @model_validator(mode="after")
    def _check_shapes(self) -> "Mdp":
        expected = (self.n_states, self.n_actions, self.n_states)
        if self.kernel.shape != expected:
            raise ValueError(f"kernel shape {self.kernel.shape} != {expected}")
        if self.reward.shape != expected[:2]:
            raise ValueError(f"reward shape {self.reward.shape} != {expected[:2]}")
        return self

    @classmethod
    def from_arrays(cls, kernel, reward, reward_bound: Optional[float] = None) -> "Mdp":
        """Build an MDP, inferring sizes from the kernel.

        Args:
            kernel: Nested sequence or array of shape (|S|, |A|, |S|)
            reward: Nested sequence or array of shape (|S|, |A|)
            reward_bound: Declared R; defaults to max |r| (at least 0)

        Returns:
            Mdp instance
        """
        kernel = np.asarray(kernel, dtype=float)
        reward = np.asarray(reward, dtype=float)
        if kernel.ndim != 3:
            raise ValueError(f"kernel must be 3-dimensional, got shape {kernel.shape}")
        if reward_bound is None:
            reward_bound = float(np.max(np.abs(reward))) if reward.size else 0.0
        return cls(
            n_states=kernel.shape[0],
            n_actions=kernel.shape[1],
            kernel=kernel,
            reward=reward,
            reward_bound=reward_bound,
        )

    def with_reward(self, reward, reward_bound: Optional[float] = None) -> "Mdp":
        """Return a copy with a different reward table."""
        return Mdp.from_arrays(self.kernel, reward, reward_bound)

    @property
    def flat_kernel(self) -> np.ndarray:
        """Kernel reshaped to (|S||A|, |S|), row index s*|A| + a."""
        return self.kernel.reshape(self.n_states * self.n_actions, self.n_states)


class Policy(BaseModel):
    """Direct (tabular) policy pi(a|s), optionally constrained to Pi_alpha."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    table: np.ndarray = Field(..., description="Row-stochastic table pi[s][a]")
    floor: float = Field(default=0.0, ge=0.0, description="Floor alpha when constrained to Pi_alpha")

    @field_validator("table", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    @model_validator(mode="after")
    def _check_stochastic(self) -> "Policy":
        tol = settings.prob_tol
        if self.table.ndim != 2:
            raise ValueError(f"policy table must be 2-dimensional, got shape {self.table.shape}")
        if np.any(self.table < -tol):
            s, a = np.argwhere(self.table < -tol)[0]
            raise ValueError(f"negative probability at ({s}, {a}): {self.table[s, a]!r}")
        sums = self.table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > tol)
        if bad.size:
            raise ValueError(f"row {bad[0]} sums to {sums[bad[0]]!r}")
        if self.floor > 0 and np.any(self.table < self.floor - tol):
            s, a = np.argwhere(self.table < self.floor - tol)[0]
            raise ValueError(
                f"entry ({s}, {a}) = {self.table[s, a]!r} below floor {self.floor}"
            )
        return self

    @property
    def n_states(self) -> int:
        return self.table.shape[0]

    @property
    def n_actions(self) -> int:
        return self.table.shape[1]

    def is_interior(self) -> bool:
        """True when every entry is strictly positive (pi in Pi_+)."""
        return bool(np.all(self.table > 0.0))

    def in_floor(self, alpha: float, tol: Optional[float] = None) -> bool:
        """True when every entry is at least ``alpha`` (pi in Pi_alpha)."""
        tol = settings.prob_tol if tol is None else tol
        return bool(np.all(self.table >= alpha - tol))

    @classmethod
    def uniform(cls, n_states: int, n_actions: int) -> "Policy":
        """Uniform policy; lies in Pi_alpha for every alpha <= 1/|A|."""
        return cls(table=np.full((n_states, n_actions), 1.0 / n_actions))

    @classmethod
    def deterministic(cls, actions: Sequence[int], n_actions: int, alpha: float = 0.0) -> "Policy":
        """Deterministic policy, or its alpha-clipped vertex when ``alpha`` > 0.

        The chosen action gets 1 - (|A| - 1) * alpha and the others alpha.
        """
        actions = np.asarray(actions, dtype=int)
        table = np.full((actions.size, n_actions), alpha)
        table[np.arange(actions.size), actions] = 1.0 - (n_actions - 1) * alpha
        return cls(table=table, floor=alpha)

    @classmethod
    def random(
        cls,
        rng: np.random.Generator,
        n_states: int,
        n_actions: int,
        alpha: float = 0.0,
    ) -> "Policy":
        """Uniformly random policy on Pi_alpha: alpha + (1 - |A| alpha) * Dirichlet(1)."""
        mass = rng.dirichlet(np.ones(n_actions), size=n_states)
        table = alpha + (1.0 - n_actions * alpha) * mass
        table /= table.sum(axis=1, keepdims=True)
        return cls(table=table, floor=alpha)


class InducedChain(BaseModel):
    """Markov chain and reward vector induced by a policy."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p_pi: np.ndarray = Field(..., description="Transition matrix P^pi[s][s']")
    r_pi: np.ndarray = Field(..., description="Reward vector r^pi[s]")
    theta_pi: np.ndarray = Field(..., description="|S| x |S||A| policy matrix with Theta P = P^pi")

    @field_validator("p_pi", "r_pi", "theta_pi", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class TangentDirection(BaseModel):
    """Element of the tangent space of the product of action simplices."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    table: np.ndarray = Field(..., description="Direction u[s][a] with zero row sums")

    @field_validator("table", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    @model_validator(mode="after")
    def _check_row_sums(self) -> "TangentDirection":
        sums = self.table.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums) > settings.prob_tol)
        if bad.size:
            raise ValueError(f"row {bad[0]} of tangent direction sums to {sums[bad[0]]!r}")
        return self

    @classmethod
    def zeros(cls, n_states: int, n_actions: int) -> "TangentDirection":
        return cls(table=np.zeros((n_states, n_actions)))

    @classmethod
    def random(cls, rng: np.random.Generator, n_states: int, n_actions: int) -> "TangentDirection":
        """Random direction with zero row sums and unit max-norm."""
        raw = rng.standard_normal((n_states, n_actions))
        raw -= raw.mean(axis=1, keepdims=True)
        scale = np.max(np.abs(raw))
        if scale > 0:
            raw /= scale
        # recentre after scaling so row sums stay within tolerance
        raw -= raw.mean(axis=1, keepdims=True)
        return cls(table=raw)


class Violation(BaseModel):
    """One invariant violation found by ``validate_mdp``."""

    kind: str = Field(..., description="row_sum | negative | reward_bound | non_finite")
    state: int = Field(..., description="State index s")
    action: int = Field(..., description="Action index a")
    next_state: Optional[int] = Field(None, description="Next-state index for entry-level violations")
    message: str = Field(..., description="Human-readable description")


class ValidationReport(BaseModel):
    """Every invariant violation of an MDP; empty when the MDP is valid."""

    violations: List[Violation] = Field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations

    def messages(self) -> List[str]:
        return [v.message for v in self.violations]
