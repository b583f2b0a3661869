"""Average-reward multichain MDPs

Exact evaluation of recurrent and transient structure, policy gradients,
floored-simplex projections and alpha-clipped policy mirror ascent with exact
or sampled gradients.
"""

from .core import (
    GenerativeModel,
    MdpError,
    PolicyMirrorAscent,
    StochasticPolicyMirrorAscent,
    classify,
    critic,
    evaluate,
    policy_gradient,
    policy_iteration,
    run_pma,
    run_spma,
    validate_mdp,
    visitation,
)
from .models import (
    Classification,
    CriticConfig,
    DivergenceKind,
    Mdp,
    PmaTrace,
    Policy,
    ScheduleKind,
    StepSchedule,
    ValueBundle,
)

__version__ = "0.1.0"
__all__ = [
    "Classification",
    "CriticConfig",
    "DivergenceKind",
    "GenerativeModel",
    "Mdp",
    "MdpError",
    "PmaTrace",
    "Policy",
    "PolicyMirrorAscent",
    "ScheduleKind",
    "StepSchedule",
    "StochasticPolicyMirrorAscent",
    "ValueBundle",
    "classify",
    "critic",
    "evaluate",
    "policy_gradient",
    "policy_iteration",
    "run_pma",
    "run_spma",
    "validate_mdp",
    "visitation",
]
