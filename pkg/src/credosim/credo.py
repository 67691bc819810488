"""Credo reward mixing over team-structured populations.

Agents carry a credo: simplex weights over their individual reward, their
team's mean reward, and the population's mean reward. A RewardVector is a
plain float array of per-agent exogenous rewards for one accounting period
(one episode in the matrix game, one timestep in the gridworld); this module
is agnostic to what the period is.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigurationError, ValidationError

SIMPLEX_TOL = 1e-9
NORMALIZE_TOL = 1e-6


@dataclass(frozen=True)
class CredoVector:
    """Simplex weights <psi, phi, omega> on self-, team-, and system-reward.

    `team_weights` optionally stores the general multi-team form (one weight
    per team of membership); the engine itself only evaluates the
    single-membership triple, where `phi` is that one team weight.
    """

    psi: float
    phi: float
    omega: float
    team_weights: tuple[float, ...] | None = field(default=None, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "psi", float(self.psi))
        object.__setattr__(self, "phi", float(self.phi))
        object.__setattr__(self, "omega", float(self.omega))
        for name, w in (("psi", self.psi), ("phi", self.phi), ("omega", self.omega)):
            if w < 0:
                raise ValidationError(f"credo weight {name}={w} is negative")
        total = self.psi + self.phi + self.omega
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise ValidationError(f"credo weights sum to {total!r}, expected 1")
        if self.team_weights is not None:
            if any(w < 0 for w in self.team_weights):
                raise ValidationError("per-team credo weights must be non-negative")
            if abs(sum(self.team_weights) - self.phi) > SIMPLEX_TOL:
                raise ValidationError("per-team credo weights must sum to phi")

    @classmethod
    def normalized(cls, psi: float, phi: float, omega: float) -> "CredoVector":
        """Build a credo, renormalizing sums within 1e-6 of 1; reject worse."""
        total = psi + phi + omega
        if abs(total - 1.0) > NORMALIZE_TOL:
            raise ValidationError(
                f"credo weights sum to {total!r}; more than {NORMALIZE_TOL} off the simplex"
            )
        return cls(psi / total, phi / total, omega / total)

    def as_tuple(self) -> tuple[float, float, float]:
        return (self.psi, self.phi, self.omega)


@dataclass(frozen=True)
class TeamStructure:
    """Disjoint partition of agent ids 0..N-1 into non-empty teams."""

    teams: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        seen: set[int] = set()
        for idx, team in enumerate(self.teams):
            if len(team) == 0:
                raise ConfigurationError(f"team {idx} is empty")
            members = set(team)
            if members & seen:
                raise ConfigurationError(f"team {idx} overlaps another team")
            seen |= members
        if seen != set(range(len(seen))):
            raise ConfigurationError("teams must partition contiguous agent ids 0..N-1")
        object.__setattr__(
            self,
            "_agent_team",
            {a: t for t, team in enumerate(self.teams) for a in team},
        )
        n = len(seen)
        mates = [()] * n
        outs = [()] * n
        for t, team in enumerate(self.teams):
            members = set(team)
            outside = tuple(a for a in range(n) if a not in members)
            for a in team:
                mates[a] = tuple(m for m in team if m != a)
                outs[a] = outside
        object.__setattr__(self, "_teammates", tuple(mates))
        object.__setattr__(self, "_outsiders", tuple(outs))

    @classmethod
    def contiguous(cls, num_agents: int, num_teams: int) -> "TeamStructure":
        """Equal-size teams of consecutive agent ids; N must divide evenly."""
        if num_agents <= 0 or num_teams <= 0 or num_agents % num_teams != 0:
            raise ConfigurationError(
                f"cannot split {num_agents} agents into {num_teams} equal teams"
            )
        size = num_agents // num_teams
        return cls(
            tuple(
                tuple(range(t * size, (t + 1) * size)) for t in range(num_teams)
            )
        )

    @property
    def num_agents(self) -> int:
        return sum(len(t) for t in self.teams)

    @property
    def num_teams(self) -> int:
        return len(self.teams)

    def team_of(self, agent: int) -> int:
        try:
            return self._agent_team[agent]
        except KeyError:
            raise ConfigurationError(f"agent {agent} is not in any team") from None

    def teammates_of(self, agent: int) -> tuple[int, ...]:
        self.team_of(agent)  # membership check
        return self._teammates[agent]

    def outsiders_of(self, agent: int) -> tuple[int, ...]:
        self.team_of(agent)
        return self._outsiders[agent]


def _check_rewards(rewards: np.ndarray, structure: TeamStructure) -> np.ndarray:
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.shape != (structure.num_agents,):
        raise ValidationError(
            f"reward vector has shape {rewards.shape}, expected ({structure.num_agents},)"
        )
    return rewards


def team_reward(agent: int, rewards, structure: TeamStructure) -> float:
    """Mean reward over the agent's team (rewards shared equally)."""
    rewards = _check_rewards(rewards, structure)
    team = structure.teams[structure.team_of(agent)]
    return float(sum(rewards[a] for a in team) / len(team))


def system_reward(rewards) -> float:
    """Mean reward over the whole population."""
    rewards = np.asarray(rewards, dtype=np.float64)
    if rewards.size == 0:
        raise ConfigurationError("system reward of an empty population")
    return float(rewards.sum() / rewards.size)


def credo_reward(agent: int, credo: CredoVector, rewards, structure: TeamStructure) -> float:
    """Mix the agent's own, team, and system rewards by its credo weights."""
    rewards = _check_rewards(rewards, structure)
    ir = float(rewards[agent])
    tr = team_reward(agent, rewards, structure)
    sr = system_reward(rewards)
    return credo.psi * ir + credo.phi * tr + credo.omega * sr


def credo_reward_all(credos, rewards, structure: TeamStructure) -> np.ndarray:
    """Elementwise credo mixing for the whole population."""
    rewards = _check_rewards(rewards, structure)
    n = structure.num_agents
    if len(credos) != n:
        raise ValidationError(f"{len(credos)} credos for {n} agents")
    team_means = {
        t: sum(rewards[a] for a in team) / len(team)
        for t, team in enumerate(structure.teams)
    }
    sr = system_reward(rewards)
    out = np.empty(n, dtype=np.float64)
    for agent in range(n):
        cr = credos[agent]
        out[agent] = (
            cr.psi * float(rewards[agent])
            + cr.phi * team_means[structure.team_of(agent)]
            + cr.omega * sr
        )
    return out
