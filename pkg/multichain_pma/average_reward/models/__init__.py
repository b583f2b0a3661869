"""Data models for the average-reward toolkit."""

from .chain import CanonicalForm, ChainConstants, Classification, TargetTimeRow, VisitationBundle
from .experiment import (
    Assertion,
    CheckSuite,
    ExperimentConfig,
    FixtureName,
    RunArtifact,
    SuiteReport,
)
from .mdp import (
    InducedChain,
    Mdp,
    Policy,
    TangentDirection,
    ValidationReport,
    Violation,
)
from .pma import (
    CoefficientEstimate,
    CoefficientMethod,
    EnvelopeReport,
    EnvelopeRow,
    IterationRecord,
    PmaTrace,
    PolicyIterationResult,
    ReferencePolicy,
    ReferenceSource,
    ScheduleKind,
    StepSchedule,
)
from .projection import DivergenceKind, FlooredSimplexPoint
from .sampling import CriticConfig, GEstimate, Trajectory
from .values import BellmanResiduals, GradientTable, PerformanceDifference, ValueBundle

__all__ = [
    "Assertion",
    "BellmanResiduals",
    "CanonicalForm",
    "ChainConstants",
    "CheckSuite",
    "Classification",
    "CoefficientEstimate",
    "CoefficientMethod",
    "CriticConfig",
    "DivergenceKind",
    "EnvelopeReport",
    "EnvelopeRow",
    "ExperimentConfig",
    "FixtureName",
    "FlooredSimplexPoint",
    "GEstimate",
    "GradientTable",
    "InducedChain",
    "IterationRecord",
    "Mdp",
    "PerformanceDifference",
    "PmaTrace",
    "Policy",
    "PolicyIterationResult",
    "ReferencePolicy",
    "ReferenceSource",
    "RunArtifact",
    "ScheduleKind",
    "StepSchedule",
    "SuiteReport",
    "TangentDirection",
    "Trajectory",
    "ValidationReport",
    "ValueBundle",
    "VisitationBundle",
    "Violation",
]
