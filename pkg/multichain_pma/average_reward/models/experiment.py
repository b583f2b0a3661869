"""Experiment configuration, run artifacts and property-suite reports."""

from enum import Enum
from pathlib import Path
from typing import Any, Dict, List, Optional, Union

from pydantic import BaseModel, Field, field_validator, model_validator

from .pma import ScheduleKind
from .projection import DivergenceKind


class FixtureName(str, Enum):
    """Built-in MDP generators."""
    TWOCHAIN = "twochain"
    RANDOM_MULTICHAIN = "random_multichain"
    WEAKLY_COMM = "weakly_comm"
    ERGODIC_RING = "ergodic_ring"


class CheckSuite(str, Enum):
    """Property suites run by ``check``."""
    BELLMAN = "bellman"
    PDL = "pdl"
    GRAD = "grad"
    PROJ = "proj"
    CLASSIFY = "classify"
    CRITIC = "critic"
    RATES = "rates"
    TARGET = "target"
    WEAK = "weak"


class ExperimentConfig(BaseModel):
    """Resolved inputs of one CLI run."""

    mdp_path: Optional[Path] = Field(None, description="MDP JSON document")
    fixture: Optional[FixtureName] = Field(None, description="Generator used instead of a file")
    fixture_params: Dict[str, Union[int, float, str, List[int]]] = Field(default_factory=dict)
    mu: str = Field(default="uniform", description="'uniform' or a distribution JSON file")
    alpha: float = Field(default=0.05, ge=0.0, description="Policy floor")
    divergence: DivergenceKind = Field(default=DivergenceKind.KL)
    schedule: ScheduleKind = Field(default=ScheduleKind.CONSTANT)
    eta: float = Field(default=0.5, gt=0.0, description="Initial step size")
    c_alpha: Optional[float] = Field(None, description="Ratio constant for adaptive steps")
    iters: int = Field(default=200, ge=0, description="Iterations K")
    n: int = Field(default=50, gt=0, description="Critic trajectories N")
    horizon: int = Field(default=200, gt=0, description="Critic horizon H")
    n2: int = Field(default=50, gt=0, description="Critic trajectories N'")
    horizon2: int = Field(default=200, gt=0, description="Critic horizon H'")
    seed: int = Field(default=0, ge=0, lt=2**64, description="Root seed")
    output_dir: Path = Field(default=Path("output"))

    @field_validator("mdp_path")
    @classmethod
    def _mdp_exists(cls, value: Optional[Path]) -> Optional[Path]:
        if value is not None and not value.exists():
            raise ValueError(f"MDP file not found: {value}")
        return value

    @field_validator("mu")
    @classmethod
    def _mu_exists(cls, value: str) -> str:
        if value != "uniform" and not Path(value).exists():
            raise ValueError(f"mu must be 'uniform' or an existing file, got {value!r}")
        return value

    @model_validator(mode="after")
    def _check_source(self) -> "ExperimentConfig":
        if self.mdp_path is None and self.fixture is None:
            raise ValueError("either an MDP file or a fixture name is required")
        if self.schedule == ScheduleKind.ADAPTIVE and (self.c_alpha is not None and self.c_alpha <= 1.0):
            raise ValueError("adaptive schedule needs c_alpha > 1")
        return self


class RunArtifact(BaseModel):
    """Files produced by one CLI run."""

    trace_csv: Optional[Path] = None
    summary_json: Path
    config_json: Path
    tables: Dict[str, Path] = Field(default_factory=dict, description="CSV tables and policy documents by name")
    summary: Dict[str, Any] = Field(default_factory=dict, description="Contents of summary_json")

    def paths(self) -> List[Path]:
        """Every file written, in a fixed order."""
        head = [self.summary_json, self.config_json]
        if self.trace_csv is not None:
            head.append(self.trace_csv)
        return head + [self.tables[name] for name in sorted(self.tables)]


class Assertion(BaseModel):
    """One measured property with its threshold."""

    name: str
    measured: float
    threshold: float
    passed: bool

    @property
    def margin(self) -> float:
        return self.threshold - self.measured


class SuiteReport(BaseModel):
    """Assertions of one property suite."""

    suite: CheckSuite
    seed: int
    assertions: List[Assertion] = Field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(a.passed for a in self.assertions)

    @property
    def failures(self) -> List[Assertion]:
        return [a for a in self.assertions if not a.passed]

    def add(self, name: str, measured: float, threshold: float, passed: Optional[bool] = None) -> Assertion:
        """Record ``measured <= threshold`` (or an explicit verdict)."""
        verdict = bool(measured <= threshold) if passed is None else bool(passed)
        row = Assertion(name=name, measured=float(measured), threshold=float(threshold), passed=verdict)
        self.assertions.append(row)
        return row
