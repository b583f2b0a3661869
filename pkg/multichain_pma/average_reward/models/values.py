"""Policy evaluation and gradient models."""

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator

from .arrays import frozen_array


class ValueBundle(BaseModel):
    """Gain, bias and action-value tables of a fixed policy."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    j: np.ndarray = Field(..., description="Gain J^pi[s]")
    v: np.ndarray = Field(..., description="Bias V^pi[s], normalized by P_star V = 0")
    k: np.ndarray = Field(..., description="Action gain K^pi[s][a] = (P J^pi)(s, a)")
    q: np.ndarray = Field(..., description="Relative action value Q^pi = r + P V^pi - K^pi")
    g: np.ndarray = Field(..., description="Q on recurrent states, K on transient states")
    p_star: np.ndarray = Field(..., description="Cesaro limit P^pi_star used for the evaluation")

    @field_validator("j", "v", "k", "q", "g", "p_star", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class BellmanResiduals(BaseModel):
    """Sup-norm residuals of the average-reward Bellman equations."""

    gain: float = Field(..., description="||P^pi J - J||_inf")
    bias: float = Field(..., description="||r^pi + P^pi V - J - V||_inf")
    normalization: float = Field(..., description="||P_star V||_inf")

    def within(self, tol: float) -> bool:
        return max(self.gain, self.bias, self.normalization) <= tol


class GradientTable(BaseModel):
    """Gradient of J_mu with respect to the direct policy parameters."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    grad: np.ndarray = Field(..., description="dJ_mu / dpi(a|s)")
    full_support: bool = Field(..., description="False when mu lacks full support (the gradient formula does not apply)")

    @field_validator("grad", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    def directional(self, direction: np.ndarray) -> float:
        """Directional derivative sum_{s,a} grad[s][a] u[s][a]."""
        return float(np.sum(self.grad * np.asarray(direction, dtype=float)))


class PerformanceDifference(BaseModel):
    """Both sides of the multichain performance difference identity."""

    lhs: float = Field(..., description="J_mu^pi - J_mu^pi'")
    rhs: float = Field(..., description="Visitation-weighted sum")
    recurrent_term: float = Field(..., description="Sum over recurrent states with d and Q^pi'")
    transient_term: float = Field(..., description="Sum over transient states with delta and K^pi'")

    @property
    def gap(self) -> float:
        return abs(self.lhs - self.rhs)
