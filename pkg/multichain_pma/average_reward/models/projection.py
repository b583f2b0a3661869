"""Bregman divergence kinds and floored-simplex points."""

from enum import Enum

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ...shared.config import settings
from .arrays import frozen_array


class DivergenceKind(str, Enum):
    """Bregman generators supported by the mirror step."""
    EUCLIDEAN = "euclid"
    KL = "kl"


class FlooredSimplexPoint(BaseModel):
    """Point of M_alpha = {p in simplex : p_i >= alpha}."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    p: np.ndarray = Field(..., description="Probability vector of length d")
    alpha: float = Field(..., ge=0.0, description="Floor alpha <= 1/d")

    @field_validator("p", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    @model_validator(mode="after")
    def _check_feasible(self) -> "FlooredSimplexPoint":
        tol = settings.prob_tol
        d = self.p.size
        if self.alpha * d > 1.0 + tol:
            raise ValueError(f"floor {self.alpha} exceeds 1/d = {1.0 / d}")
        if abs(self.p.sum() - 1.0) > tol:
            raise ValueError(f"point sums to {self.p.sum()!r}")
        if np.any(self.p < self.alpha - tol):
            raise ValueError(f"entry {self.p.min()!r} below floor {self.alpha}")
        return self
