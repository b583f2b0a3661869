"""Chain classification, canonical form and visitation models."""

from typing import List

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .arrays import frozen_array


class Classification(BaseModel):
    """Partition of the states into recurrent classes and transient states."""

    model_config = ConfigDict(frozen=True)

    n_states: int = Field(..., gt=0, description="Number of states |S|")
    recurrent_classes: List[List[int]] = Field(..., description="Disjoint recurrent classes R_1..R_m")
    transient: List[int] = Field(default_factory=list, description="Transient states T")

    @field_validator("recurrent_classes", mode="after")
    @classmethod
    def _sort_classes(cls, value: List[List[int]]) -> List[List[int]]:
        classes = [sorted(int(s) for s in c) for c in value]
        return sorted(classes, key=lambda c: c[0] if c else -1)

    @field_validator("transient", mode="after")
    @classmethod
    def _sort_transient(cls, value: List[int]) -> List[int]:
        return sorted(int(s) for s in value)

    @model_validator(mode="after")
    def _check_partition(self) -> "Classification":
        if not self.recurrent_classes:
            raise ValueError("a finite chain has at least one recurrent class")
        seen: List[int] = []
        for c in self.recurrent_classes:
            if not c:
                raise ValueError("recurrent classes must be nonempty")
            seen.extend(c)
        seen.extend(self.transient)
        if sorted(seen) != list(range(self.n_states)):
            raise ValueError(f"classes and transient set do not partition range({self.n_states})")
        return self

    @property
    def m(self) -> int:
        """Number of recurrent classes."""
        return len(self.recurrent_classes)

    @property
    def recurrent_states(self) -> List[int]:
        return sorted(s for c in self.recurrent_classes for s in c)

    @property
    def recurrent_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_states, dtype=bool)
        mask[self.recurrent_states] = True
        return mask

    @property
    def transient_mask(self) -> np.ndarray:
        return ~self.recurrent_mask

    def class_of(self, state: int) -> int:
        """Index of the recurrent class holding ``state``, or -1 if transient."""
        for i, c in enumerate(self.recurrent_classes):
            if state in c:
                return i
        return -1

    def same_as(self, other: "Classification") -> bool:
        return (
            self.n_states == other.n_states
            and self.recurrent_classes == other.recurrent_classes
            and self.transient == other.transient
        )


class CanonicalForm(BaseModel):
    """Blocks of P^pi in canonical (classes first, transient last) order."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    classification: Classification
    permutation: List[int] = Field(..., description="Original state index at each canonical position")
    recurrent_blocks: List[np.ndarray] = Field(..., description="R_i^pi, one per class")
    transient_to_class: List[np.ndarray] = Field(..., description="S_i^pi, |T| x |R_i| each")
    transient_block: np.ndarray = Field(..., description="T^pi, |T| x |T|")
    stationary: List[np.ndarray] = Field(..., description="g_i^pi, one per class")

    @field_validator("recurrent_blocks", "transient_to_class", "stationary", mode="before")
    @classmethod
    def _as_arrays(cls, value):
        return [frozen_array(v) for v in value]

    @field_validator("transient_block", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class VisitationBundle(BaseModel):
    """Recurrent measure d, transient measure delta and their splice rho."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    d: np.ndarray = Field(..., description="Recurrent visitation measure mu^T P_star")
    delta: np.ndarray = Field(..., description="Transient visitation measure mu^T (I - T_bar)^-1")
    rho: np.ndarray = Field(..., description="d on recurrent states, delta on transient states")

    @field_validator("d", "delta", "rho", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class ChainConstants(BaseModel):
    """Expected target time, transient half-life and cover time of a chain."""

    model_config = ConfigDict(frozen=True)

    t_tar_per_class: List[float] = Field(..., description="Expected target time of each class")
    t_tar: float = Field(..., ge=0.0, description="Maximum expected target time")
    t_half: int = Field(..., ge=0, description="Transient half-life (0 when T is empty)")
    t_cov_per_class: List[float] = Field(..., description="Expected cover time of each class")
    t_cov: float = Field(..., ge=0.0, description="Maximum expected cover time")
    t_cov_estimated: List[bool] = Field(..., description="True where the cover time is a Monte Carlo estimate")
    t_cov_stderr: List[float] = Field(..., description="Standard error of estimated cover times (0 when exact)")


class TargetTimeRow(BaseModel):
    """One check of the Cesaro-average target-time bound."""

    class_index: int
    state: int
    k: int
    deviation: float = Field(..., description="l1 distance of the k-step Cesaro average to g_i")
    bound: float = Field(..., description="2 t_tar,i / k")

    @property
    def holds(self) -> bool:
        return self.deviation <= self.bound + 1e-12
