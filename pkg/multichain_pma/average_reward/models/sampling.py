"""Critic configuration, estimates and trajectories."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .arrays import frozen_array


class CriticConfig(BaseModel):
    """Trajectory budgets of the critic."""

    model_config = ConfigDict(frozen=True)

    n: int = Field(..., gt=0, description="Trajectories N per (s, a) for K_hat")
    h: int = Field(..., gt=0, description="Horizon H for K_hat")
    n2: int = Field(..., gt=0, description="Trajectories N' per (s, a) for Q_hat")
    h2: int = Field(..., gt=0, description="Horizon H' for Q_hat")

    def transitions(self, n_states: int, n_actions: int) -> int:
        """Next-state draws used by one critic call."""
        return n_states * n_actions * (self.n * self.h + self.n2 * self.h2)

    def samples(self, n_states: int, n_actions: int) -> int:
        """Draws plus one start query per trajectory."""
        return self.transitions(n_states, n_actions) + n_states * n_actions * (self.n + self.n2)


class GEstimate(BaseModel):
    """Critic output."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    g_hat: np.ndarray = Field(..., description="Q_hat on recurrent states, K_hat on transient states")
    k_hat: np.ndarray = Field(..., description="Estimated action gain")
    q_hat: np.ndarray = Field(..., description="Estimated relative action value")
    transitions: int = Field(..., ge=0, description="Next-state draws consumed")
    samples_used: int = Field(..., ge=0, description="Draws plus one start query per trajectory")

    @field_validator("g_hat", "k_hat", "q_hat", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class Trajectory(BaseModel):
    """States and actions (s_0, a_0), ..., (s_H, a_H) of one rollout."""

    model_config = ConfigDict(frozen=True)

    states: List[int]
    actions: List[int]

    @property
    def pairs(self) -> List[tuple]:
        return list(zip(self.states, self.actions))

    def __len__(self) -> int:
        return len(self.states)
