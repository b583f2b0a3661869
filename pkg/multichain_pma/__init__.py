"""multichain_pma: average-reward policy mirror ascent for multichain MDPs.

The ``average_reward`` subpackage holds the models and numerical core,
``shared`` the settings, logging and solver base class, and ``cli`` the
``multichain-pma`` command.
"""

from . import average_reward, shared
from .average_reward import (
    Classification,
    GenerativeModel,
    Mdp,
    Policy,
    classify,
    evaluate,
    run_pma,
    run_spma,
)
from .shared import BaseSolver, Settings, get_logger, settings

__version__ = "0.1.0"
__all__ = [
    "average_reward",
    "shared",
    "BaseSolver",
    "Classification",
    "GenerativeModel",
    "Mdp",
    "Policy",
    "Settings",
    "classify",
    "evaluate",
    "get_logger",
    "run_pma",
    "run_spma",
    "settings",
]
