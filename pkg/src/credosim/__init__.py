"""credosim: deterministic multi-agent team simulation with credo reward mixing.

Populations of agents partitioned into teams blend their own, their team's,
and the whole system's rewards through simplex-weighted credos. The package
implements the incentive analysis of the teamed one-shot dilemma, a learning
testbed on the iterated version, and the Cleanup gridworld social dilemma,
plus a reproduction harness emitting CSV results.
"""

__version__ = "0.1.0"

from .credo import (
    CredoVector,
    TeamStructure,
    credo_reward,
    credo_reward_all,
    system_reward,
    team_reward,
)
from .errors import ConfigurationError, CredosimError, DomainError, ValidationError
from .incentives import (
    IncentiveGrid,
    StageGameParams,
    StrategyProfile,
    cooperation_incentive,
    incentive_grid,
    monte_carlo_incentive_sign,
    simplex_lattice,
    stage_game_expected_gain,
)

__all__ = [
    "__version__",
    "CredoVector",
    "TeamStructure",
    "team_reward",
    "system_reward",
    "credo_reward",
    "credo_reward_all",
    "StageGameParams",
    "StrategyProfile",
    "IncentiveGrid",
    "cooperation_incentive",
    "incentive_grid",
    "simplex_lattice",
    "stage_game_expected_gain",
    "monte_carlo_incentive_sign",
    "CredosimError",
    "ConfigurationError",
    "ValidationError",
    "DomainError",
]
