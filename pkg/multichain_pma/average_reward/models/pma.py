"""Mirror-ascent schedules, traces, coefficient estimates and envelope reports."""

from enum import Enum
from typing import List, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from .arrays import frozen_array
from .projection import DivergenceKind


class ScheduleKind(str, Enum):
    """Step-size schedule options."""
    CONSTANT = "const"
    ADAPTIVE = "adaptive"


class CoefficientMethod(str, Enum):
    """How a coefficient estimate was obtained."""
    VERTEX_ENUMERATION = "vertex_enumeration"
    RANDOM_SAMPLING = "random_sampling"


class ReferenceSource(str, Enum):
    """Where the reference optimum of Pi_alpha came from."""
    SUPPLIED = "supplied"
    MULTI_START = "multi_start"
    CLIPPED_POLICY_ITERATION = "clipped_policy_iteration"


class StepSchedule(BaseModel):
    """Constant or adaptive (geometrically growing) step sizes."""

    kind: ScheduleKind = Field(default=ScheduleKind.CONSTANT, description="Schedule type")
    eta0: float = Field(..., gt=0.0, description="Initial step size")
    c_alpha: Optional[float] = Field(None, description="Ratio constant C_alpha (adaptive only)")

    @model_validator(mode="after")
    def _check_ratio(self) -> "StepSchedule":
        if self.kind == ScheduleKind.ADAPTIVE and (self.c_alpha is None or self.c_alpha <= 1.0):
            raise ValueError("adaptive schedule needs c_alpha > 1")
        return self

    def steps(self, iters: int, cap: Optional[float] = None) -> List[float]:
        """Step sizes eta_0..eta_{iters-1}.

        Adaptive steps follow eta_{k+1} = eta_k C/(C - 1); every step is capped
        at ``cap`` when given.
        """
        out: List[float] = []
        eta = self.eta0
        for _ in range(iters):
            out.append(eta if cap is None else min(eta, cap))
            if self.kind == ScheduleKind.ADAPTIVE:
                eta = eta * self.c_alpha / (self.c_alpha - 1.0)
        return out


class IterationRecord(BaseModel):
    """State of one mirror-ascent iterate."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    k: int = Field(..., ge=0, description="Iteration index")
    policy: np.ndarray = Field(..., description="Snapshot of pi_k")
    j_mu: float = Field(..., description="J_mu^{pi_k}, computed exactly")
    gap: Optional[float] = Field(None, description="J_ref - J_mu^{pi_k} when a reference is known")
    divergence_to_ref: Optional[float] = Field(None, description="D_rho(pi_ref, pi_k)")
    eta: Optional[float] = Field(None, description="Step used to produce pi_{k+1} (None on the last row)")
    first_order: Optional[float] = Field(None, description="max_s sum_a G(s,a)(pi_k - pi_{k+1})(a|s)")
    samples_cum: int = Field(default=0, description="Generative-model samples used so far, including the critic call at this iterate")
    g_error: Optional[float] = Field(None, description="||G_hat - G||_inf at this iterate (stochastic runs)")
    inexact_slack: Optional[float] = Field(None, description="2 B_alpha eps_hat monotonicity slack")
    wall_time: float = Field(default=0.0, description="Seconds since the run started")

    @field_validator("policy", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class PmaTrace(BaseModel):
    """Per-iteration history of a mirror-ascent run."""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    alpha: float
    divergence: DivergenceKind
    schedule: StepSchedule
    reference_value: Optional[float] = Field(None, description="J_mu of the reference policy")
    reference_source: Optional[ReferenceSource] = None
    stochastic: bool = Field(default=False, description="True for generative-model runs")
    records: List[IterationRecord] = Field(default_factory=list)

    @property
    def final(self) -> IterationRecord:
        return self.records[-1]

    @property
    def values(self) -> np.ndarray:
        return np.array([r.j_mu for r in self.records])

    @property
    def gaps(self) -> Optional[np.ndarray]:
        if self.reference_value is None:
            return None
        return np.array([r.gap for r in self.records])

    @property
    def total_samples(self) -> int:
        return self.records[-1].samples_cum if self.records else 0


class CoefficientEstimate(BaseModel):
    """Sampled lower bounds on B_alpha and C_alpha."""

    b_alpha: float = Field(..., ge=0.0, description="max ||rho||_1 over evaluated policies")
    c_alpha: float = Field(..., ge=0.0, description="max entrywise rho ratio over evaluated pairs")
    methods: List[CoefficientMethod] = Field(..., description="Policy sets that were evaluated")
    n_samples: int = Field(..., ge=0, description="Random policies evaluated")
    n_vertices: int = Field(default=0, ge=0, description="Clipped deterministic policies evaluated")
    is_lower_bound: bool = Field(default=True, description="Sampling never certifies a supremum")


class EnvelopeRow(BaseModel):
    """Gap against a theoretical bound at one iteration."""

    k: int
    gap: float
    bound: float
    margin: float = Field(..., description="bound - gap")


class EnvelopeReport(BaseModel):
    """Convergence-envelope check of a trace."""

    kind: ScheduleKind
    rows: List[EnvelopeRow] = Field(default_factory=list)
    advisory_ok: bool = Field(..., description="All gaps under the bound built from estimated constants")
    shape_ok: bool = Field(..., description="Hard rate-shape assertion")
    shape_statistic: float = Field(..., description="Max scaled-gap ratio (sublinear) or fitted log slope (linear)")
    shape_threshold: float
    notes: List[str] = Field(default_factory=list)


class ReferencePolicy(BaseModel):
    """Best known policy of Pi_alpha and its value."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    policy: np.ndarray
    j_mu: float
    source: ReferenceSource

    @field_validator("policy", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)


class PolicyIterationResult(BaseModel):
    """Gain-bias optimal deterministic policy from multichain policy iteration."""

    model_config = ConfigDict(arbitrary_types_allowed=True, frozen=True)

    actions: List[int] = Field(..., description="Chosen action per state")
    gain: np.ndarray = Field(..., description="Optimal gain J_star")
    bias: np.ndarray = Field(..., description="Bias of the optimal policy")
    q_star: np.ndarray = Field(..., description="Q^{pi_star} table")
    iterations: int
    converged: bool

    @field_validator("gain", "bias", "q_star", mode="before")
    @classmethod
    def _as_array(cls, value):
        return frozen_array(value)

    @property
    def q_star_norm(self) -> float:
        return float(np.max(np.abs(self.q_star)))
