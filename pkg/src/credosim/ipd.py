"""Teamed iterated matrix game with credo reward delivery.

Each episode pairs every agent once as a focal player with a counterpart
drawn from its own team with probability nu (uniformly among teammates)
and uniformly from the rest of the population otherwise. Both sides of a
pairing observe only the other's team index, play one round, and accumulate
exogenous payoffs; after the episode's pairings the aggregate reward vector
is credo-mixed and every agent takes one bandit update per interaction it
took part in.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import _backend, metrics
from .credo import CredoVector, TeamStructure, credo_reward_all
from .errors import ConfigurationError, DomainError, ValidationError
from .learners import LearnerConfig, TabularPolicy, epsilon_schedule, select_action, update
from .rng import make_rng, randbelow

C, D = 0, 1  # cooperate / defect


def stage_payoff(action_i: int, action_j: int, b: float, c: float) -> tuple[float, float]:
    """One-shot payoffs: mutual cooperation b-c each, sucker -c, temptation b."""
    if not (b > c > 0):
        raise DomainError(f"need b > c > 0, got b={b}, c={c}")
    if action_i == C and action_j == C:
        return (b - c, b - c)
    if action_i == C:
        return (-c, b)
    if action_j == C:
        return (b, -c)
    return (0.0, 0.0)


@dataclass(frozen=True)
class Pairing:
    focal: int
    counterpart: int

    def __post_init__(self):
        if self.focal == self.counterpart:
            raise ValidationError("an agent cannot be paired with itself")


@dataclass(frozen=True)
class InteractionRecord:
    pairing: Pairing
    focal_action: int
    counterpart_action: int
    focal_payoff: float
    counterpart_payoff: float
    episode: int


@dataclass
class IPDConfig:
    population_size: int = 25
    num_teams: int = 5
    nu: float = 0.2
    b: float = 5.0
    c: float = 1.0
    episodes: int = 100_000
    seed: int = 0
    credos: list[CredoVector] = field(default_factory=list)
    window: int = 2000
    learner: LearnerConfig | None = None

    def __post_init__(self):
        if self.population_size < 2:
            raise ConfigurationError("population_size must be at least 2")
        if self.population_size % self.num_teams != 0:
            raise ConfigurationError(
                f"{self.population_size} agents do not split into {self.num_teams} equal teams"
            )
        if not (b := self.b) > (c := self.c) > 0:
            raise DomainError(f"need b > c > 0, got b={b}, c={c}")
        if not (0.0 <= self.nu <= 1.0):
            raise ValidationError(f"nu={self.nu} outside [0, 1]")
        if self.episodes < 0:
            raise ValidationError("episodes must be non-negative")
        if not self.credos:
            self.credos = [CredoVector(1.0, 0.0, 0.0)] * self.population_size
        if len(self.credos) != self.population_size:
            raise ValidationError(
                f"{len(self.credos)} credos for {self.population_size} agents"
            )
        if self.nu > 0 and self.population_size // self.num_teams < 2:
            raise ConfigurationError("teams need at least 2 members when nu > 0")
        if self.learner is None:
            decay = max(1, self.episodes // 5)
            self.learner = LearnerConfig(epsilon_decay_episodes=decay)


def sample_pairings(rng: np.random.Generator, structure: TeamStructure, nu: float) -> list[Pairing]:
    """One pairing per focal agent; teammate counterpart with probability nu."""
    pairings = []
    for focal in range(structure.num_agents):
        teammates = structure.teammates_of(focal)
        if nu > 0 and not teammates:
            raise ConfigurationError(f"agent {focal} has no teammates but nu={nu} > 0")
        u = rng.random()
        if u < nu:
            counterpart = teammates[randbelow(rng, len(teammates))]
        else:
            outsiders = structure.outsiders_of(focal)
            counterpart = outsiders[randbelow(rng, len(outsiders))]
        pairings.append(Pairing(focal, counterpart))
    return pairings


class IPDExperiment:
    """Stateful pure-Python experiment; the compiled kernel runs the same loop."""

    def __init__(self, config: IPDConfig):
        self.config = config
        self.structure = TeamStructure.contiguous(config.population_size, config.num_teams)
        self.policies = [
            TabularPolicy.zeros(config.num_teams) for _ in range(config.population_size)
        ]
        self.episode_index = 0

    def run_episode(self, rng: np.random.Generator) -> tuple[list[InteractionRecord], np.ndarray]:
        """Play one episode and learn from it; returns records and credo rewards."""
        cfg = self.config
        n = cfg.population_size
        eps = epsilon_schedule(cfg.learner, self.episode_index)
        exo = np.zeros(n, dtype=np.float64)
        records: list[InteractionRecord] = []
        for focal in range(n):
            u = rng.random()
            if u < cfg.nu:
                mates = self.structure.teammates_of(focal)
                counterpart = mates[int(rng.random() * len(mates))]
            else:
                outs = self.structure.outsiders_of(focal)
                counterpart = outs[int(rng.random() * len(outs))]
            obs_f = self.structure.team_of(counterpart)
            obs_c = self.structure.team_of(focal)
            a_f = select_action(self.policies[focal], obs_f, eps, rng)
            a_c = select_action(self.policies[counterpart], obs_c, eps, rng)
            p_f, p_c = stage_payoff(a_f, a_c, cfg.b, cfg.c)
            exo[focal] += p_f
            exo[counterpart] += p_c
            records.append(
                InteractionRecord(Pairing(focal, counterpart), a_f, a_c, p_f, p_c,
                                  self.episode_index)
            )
        credo_rewards = credo_reward_all(cfg.credos, exo, self.structure)
        for rec in records:
            focal, counterpart = rec.pairing.focal, rec.pairing.counterpart
            obs_f = self.structure.team_of(counterpart)
            obs_c = self.structure.team_of(focal)
            update(self.policies[focal], obs_f, rec.focal_action,
                   float(credo_rewards[focal]), cfg.learner)
            update(self.policies[counterpart], obs_c, rec.counterpart_action,
                   float(credo_rewards[counterpart]), cfg.learner)
        self.episode_index += 1
        return records, credo_rewards


@dataclass(frozen=True)
class WindowStats:
    window_index: int
    coop_total: float | None
    coop_in_team: float | None
    coop_out_team: float | None
    mean_credo_reward: float


@dataclass(frozen=True)
class IPDResult:
    """Windowed metrics plus final-quarter summary of one deterministic run."""

    windows: list[WindowStats]
    coop_total: float | None
    coop_in_team: float | None
    coop_out_team: float | None
    mean_credo_reward: float
    equality: float | None
    final_quarter_credo: np.ndarray
    teammate_pairing_frequency: float
    q_tables: np.ndarray


def run_ipd_experiment(config: IPDConfig) -> IPDResult:
    """Run the configured number of episodes; fully deterministic given the seed."""
    kernel = _backend.get()
    n = config.population_size
    teams = TeamStructure.contiguous(n, config.num_teams)
    team_size = n // config.num_teams
    q = np.zeros((n, config.num_teams, 2), dtype=np.float64)
    agent_team = np.array([teams.team_of(a) for a in range(n)], dtype=np.int64)
    teammates = np.array([teams.teammates_of(a) for a in range(n)], dtype=np.int64)
    teammates = teammates.reshape(n, team_size - 1)
    outsiders = np.array(
        [[j for j in range(n) if teams.team_of(j) != teams.team_of(a)] for a in range(n)],
        dtype=np.int64,
    )
    psi = np.array([cr.psi for cr in config.credos], dtype=np.float64)
    phi = np.array([cr.phi for cr in config.credos], dtype=np.float64)
    omega = np.array([cr.omega for cr in config.credos], dtype=np.float64)
    lrn = config.learner
    out = kernel.run_ipd(
        q, agent_team, teammates, outsiders, psi, phi, omega,
        float(config.b), float(config.c), float(config.nu),
        config.episodes, config.window,
        lrn.learning_rate, lrn.epsilon_start, lrn.epsilon_end,
        lrn.epsilon_decay_episodes, config.seed,
    )

    def rate(coop, total):
        return coop / total if total > 0 else None

    windows = []
    for w in range(len(out["win_in_coop"])):
        in_c, in_n = int(out["win_in_coop"][w]), int(out["win_in_n"][w])
        out_c, out_n = int(out["win_out_coop"][w]), int(out["win_out_n"][w])
        windows.append(
            WindowStats(
                window_index=w,
                coop_total=rate(in_c + out_c, in_n + out_n),
                coop_in_team=rate(in_c, in_n),
                coop_out_team=rate(out_c, out_n),
                mean_credo_reward=float(out["win_credo_sum"][w]) / (config.window * n),
            )
        )
    fq_episodes = config.episodes // 4
    fq_credo = out["fq_credo"]
    mean_credo = float(fq_credo.sum()) / (fq_episodes * n) if fq_episodes else float("nan")
    eq = metrics.equality(fq_credo) if fq_episodes else None
    return IPDResult(
        windows=windows,
        coop_total=rate(out["fq_in_coop"] + out["fq_out_coop"], out["fq_in_n"] + out["fq_out_n"]),
        coop_in_team=rate(out["fq_in_coop"], out["fq_in_n"]),
        coop_out_team=rate(out["fq_out_coop"], out["fq_out_n"]),
        mean_credo_reward=mean_credo,
        equality=eq,
        final_quarter_credo=fq_credo,
        teammate_pairing_frequency=out["pair_in"] / out["pair_total"] if out["pair_total"] else float("nan"),
        q_tables=q,
    )
