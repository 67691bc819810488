"""Cleanup gridworld: river waste, cleanliness-coupled apple growth, beams.

Agents move on a bordered grid whose left half is a river and right half an
apple orchard. Waste accrues in the river and suppresses apple spawning;
firing the cleaning beam is costless but unrewarded work, eating an apple
pays +1, and the punishing beam hurts whoever it hits at a small cost to the
firer. Credo mixing is applied to each timestep's exogenous rewards.

Maps are data: one character per cell (`R` river, `O` orchard, `.` empty,
`#` wall, digits 0-5 agent spawn points).
"""

from __future__ import annotations

import importlib.resources
from dataclasses import dataclass, field

import numpy as np

from .credo import CredoVector, TeamStructure, credo_reward_all
from .errors import ConfigurationError, ValidationError
from .rng import randbelow

# actions
UP, DOWN, LEFT, RIGHT, STAY, TURN_LEFT, TURN_RIGHT, CLEAN_BEAM, PUNISH_BEAM = range(9)
NUM_ACTIONS = 9
_MOVE_DELTA = {UP: (0, -1), DOWN: (0, 1), LEFT: (-1, 0), RIGHT: (1, 0)}

# orientations (turning is the only way to change facing)
NORTH, EAST, SOUTH, WEST = range(4)
_FACING_DELTA = {NORTH: (0, -1), EAST: (1, 0), SOUTH: (0, 1), WEST: (-1, 0)}

# observation cell codes; agents are encoded as AGENT_BASE + team index
OBS_EMPTY, OBS_WALL, OBS_RIVER, OBS_WASTE, OBS_ORCHARD, OBS_APPLE = range(6)
AGENT_BASE = 6

_CELL_CHARS = {"#": "wall", "R": "river", "O": "orchard", ".": "empty"}


@dataclass(frozen=True)
class GridMap:
    """Static terrain: walls, river region, orchard region, spawn points."""

    width: int
    height: int
    cells: tuple[str, ...]  # row-major terrain names
    spawn_points: tuple[tuple[int, int], ...]

    def __post_init__(self):
        river = self.river_cells
        orchard = self.orchard_cells
        if not river or not orchard:
            raise ConfigurationError("map needs non-empty river and orchard regions")
        for x in range(self.width):
            if self.cell(x, 0) != "wall" or self.cell(x, self.height - 1) != "wall":
                raise ConfigurationError("map border must be walls")
        for y in range(self.height):
            if self.cell(0, y) != "wall" or self.cell(self.width - 1, y) != "wall":
                raise ConfigurationError("map border must be walls")

    @classmethod
    def from_ascii(cls, text: str) -> "GridMap":
        rows = [line for line in text.splitlines() if line.strip()]
        if not rows:
            raise ConfigurationError("empty map")
        width = len(rows[0])
        if any(len(row) != width for row in rows):
            raise ConfigurationError("map rows have unequal lengths")
        cells = []
        spawns: dict[int, tuple[int, int]] = {}
        for y, row in enumerate(rows):
            for x, ch in enumerate(row):
                if ch.isdigit():
                    if int(ch) in spawns:
                        raise ConfigurationError(f"duplicate spawn point {ch}")
                    spawns[int(ch)] = (x, y)
                    cells.append("empty")
                elif ch in _CELL_CHARS:
                    cells.append(_CELL_CHARS[ch])
                else:
                    raise ConfigurationError(f"unknown map character {ch!r}")
        ordered = tuple(spawns[i] for i in sorted(spawns))
        if sorted(spawns) != list(range(len(spawns))):
            raise ConfigurationError("spawn digits must be consecutive from 0")
        return cls(width=width, height=len(rows), cells=tuple(cells), spawn_points=ordered)

    @classmethod
    def default(cls) -> "GridMap":
        text = (
            importlib.resources.files("credosim.maps")
            .joinpath("default_map.txt")
            .read_text()
        )
        return cls.from_ascii(text)

    def cell(self, x: int, y: int) -> str:
        if 0 <= x < self.width and 0 <= y < self.height:
            return self.cells[y * self.width + x]
        return "wall"

    @property
    def river_cells(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if self.cells[y * self.width + x] == "river"
        )

    @property
    def orchard_cells(self) -> frozenset[tuple[int, int]]:
        return frozenset(
            (x, y)
            for y in range(self.height)
            for x in range(self.width)
            if self.cells[y * self.width + x] == "orchard"
        )


@dataclass
class CleanupConfig:
    num_agents: int = 6
    num_teams: int = 3
    episode_length: int = 1000
    waste_spawn_prob: float = 0.5  # expected new waste per step, spread over empty river cells
    apple_respawn_rate: float = 0.05
    waste_threshold_depletion: float = 0.4
    waste_threshold_restored: float = 0.0
    beam_length: int = 5
    beam_width: int = 3
    punish_penalty_hit: float = -50.0
    punish_cost_firer: float = -1.0
    observation_window: int = 15
    seed: int = 0
    credos: list[CredoVector] = field(default_factory=lambda: [CredoVector(1.0, 0.0, 0.0)] * 6)

    def __post_init__(self):
        if self.num_agents <= 0 or self.num_agents % self.num_teams != 0:
            raise ConfigurationError("num_agents must divide evenly into num_teams")
        if self.waste_threshold_restored > self.waste_threshold_depletion:
            raise ValidationError("restored threshold must not exceed depletion threshold")
        if self.beam_width % 2 != 1 or self.observation_window % 2 != 1:
            raise ValidationError("beam_width and observation_window must be odd")
        if self.punish_penalty_hit > 0 or self.punish_cost_firer > 0:
            raise ValidationError("punish penalties must be <= 0")
        if len(self.credos) != self.num_agents:
            raise ValidationError(f"{len(self.credos)} credos for {self.num_agents} agents")


def waste_density(env: "CleanupEnv") -> float:
    """Fraction of river cells currently occupied by waste."""
    return len(env.waste) / len(env.river_cells)


def apple_spawn_probability(density: float, config: CleanupConfig) -> float:
    """Per-empty-orchard-cell spawn probability as a function of river filth.

    Zero at or above the depletion threshold, the full respawn rate at or
    below the restored threshold, linearly interpolated in between.
    """
    hi = config.waste_threshold_depletion
    lo = config.waste_threshold_restored
    if density >= hi:
        return 0.0
    if density <= lo:
        return config.apple_respawn_rate
    return config.apple_respawn_rate * (hi - density) / (hi - lo)


class CleanupEnv:
    """Markov-game state machine; one instance per experiment, stepped sequentially."""

    def __init__(self, config: CleanupConfig, grid: GridMap | None = None):
        self.config = config
        self.grid = grid if grid is not None else GridMap.default()
        if len(self.grid.spawn_points) < config.num_agents:
            raise ConfigurationError(
                f"map has {len(self.grid.spawn_points)} spawn points for {config.num_agents} agents"
            )
        self.structure = TeamStructure.contiguous(config.num_agents, config.num_teams)
        self.river_cells = self.grid.river_cells
        self.orchard_cells = self.grid.orchard_cells
        self._river_sorted = sorted(self.river_cells)
        self._orchard_sorted = sorted(self.orchard_cells)
        self.reset()

    def reset(self):
        n = self.config.num_agents
        self.positions: list[tuple[int, int]] = list(self.grid.spawn_points[:n])
        self.orientations: list[int] = [WEST] * n
        self.waste: set[tuple[int, int]] = set()
        self.apples: set[tuple[int, int]] = set()
        self.timestep = 0
        # per-episode counters consumed by the division-of-labor metrics
        self.apples_picked = [0] * n
        self.clean_actions = [0] * n
        self.punish_actions = [0] * n

    def beam_footprint(self, agent: int) -> list[tuple[int, int]]:
        """Cells covered by a beam fired from the agent's cell along its facing."""
        x, y = self.positions[agent]
        fx, fy = _FACING_DELTA[self.orientations[agent]]
        px, py = (0, 1) if fy == 0 else (1, 0)  # perpendicular axis
        half = self.config.beam_width // 2
        cells = []
        for d in range(1, self.config.beam_length + 1):
            for lateral in range(-half, half + 1):
                cells.append((x + d * fx + lateral * px, y + d * fy + lateral * py))
        return cells

    def step(self, joint_action, rng: np.random.Generator):
        """Advance one timestep; returns (exo_rewards, credo_rewards, done).

        Sub-phases in fixed order: movement/turning, apple consumption,
        beams, waste spawning, apple spawning, credo mixing. Observations are
        rendered on demand via `render_observation`.
        """
        cfg = self.config
        n = cfg.num_agents
        if len(joint_action) != n:
            raise ValidationError(f"{len(joint_action)} actions for {n} agents")
        if self.timestep >= cfg.episode_length:
            raise ValidationError("episode is already done")
        actions = [int(a) for a in joint_action]
        if any(a < 0 or a >= NUM_ACTIONS for a in actions):
            raise ValidationError(f"action out of range in {actions}")
        exo = np.zeros(n, dtype=np.float64)

        # 1. movement and turning, resolved simultaneously
        for i in range(n):
            if actions[i] == TURN_LEFT:
                self.orientations[i] = (self.orientations[i] - 1) % 4
            elif actions[i] == TURN_RIGHT:
                self.orientations[i] = (self.orientations[i] + 1) % 4
        targets = list(self.positions)
        for i in range(n):
            delta = _MOVE_DELTA.get(actions[i])
            if delta is None:
                continue
            tx, ty = self.positions[i][0] + delta[0], self.positions[i][1] + delta[1]
            if self.grid.cell(tx, ty) != "wall":
                targets[i] = (tx, ty)
        # contested cells: uniformly random winner, losers stay
        by_target: dict[tuple[int, int], list[int]] = {}
        for i in range(n):
            if targets[i] != self.positions[i]:
                by_target.setdefault(targets[i], []).append(i)
        for cell in sorted(by_target):
            contenders = by_target[cell]
            if len(contenders) > 1:
                winner = contenders[randbelow(rng, len(contenders))]
                for i in contenders:
                    if i != winner:
                        targets[i] = self.positions[i]
        # movers bounced by agents that end up staying (cascades)
        changed = True
        while changed:
            changed = False
            stays = {targets[i] for i in range(n) if targets[i] == self.positions[i]}
            for i in range(n):
                if targets[i] != self.positions[i] and targets[i] in stays:
                    targets[i] = self.positions[i]
                    changed = True
        self.positions = targets

        # 2. apple consumption
        for i in range(n):
            if self.positions[i] in self.apples:
                self.apples.discard(self.positions[i])
                exo[i] += 1.0
                self.apples_picked[i] += 1

        # 3. beams
        for i in range(n):
            if actions[i] == CLEAN_BEAM:
                self.clean_actions[i] += 1
                for cell in self.beam_footprint(i):
                    self.waste.discard(cell)
            elif actions[i] == PUNISH_BEAM:
                self.punish_actions[i] += 1
                exo[i] += cfg.punish_cost_firer
                footprint = set(self.beam_footprint(i))
                for j in range(n):
                    if j != i and self.positions[j] in footprint:
                        exo[j] += cfg.punish_penalty_hit

        # 4. waste spawns while the river is below the depletion threshold
        density = len(self.waste) / len(self.river_cells)
        if density < cfg.waste_threshold_depletion:
            empties = [cell for cell in self._river_sorted if cell not in self.waste]
            if empties:
                p_cell = cfg.waste_spawn_prob / len(empties)
                draws = rng.random(len(empties))
                for idx in np.nonzero(draws < p_cell)[0]:
                    self.waste.add(empties[idx])

        # 5. apples spawn on empty orchard cells, rate coupled to cleanliness
        density = len(self.waste) / len(self.river_cells)
        p_apple = apple_spawn_probability(density, cfg)
        occupied = set(self.positions)
        empties = [
            cell
            for cell in self._orchard_sorted
            if cell not in self.apples and cell not in occupied
        ]
        if empties and p_apple > 0.0:
            draws = rng.random(len(empties))
            for idx in np.nonzero(draws < p_apple)[0]:
                self.apples.add(empties[idx])

        # 6. credo mixing
        credo_rewards = credo_reward_all(cfg.credos, exo, self.structure)
        self.timestep += 1
        done = self.timestep >= cfg.episode_length
        return exo, credo_rewards, done

    def render_observation(self, agent: int) -> np.ndarray:
        """Window of cell codes centered on the agent; teammates share a code."""
        cfg = self.config
        half = cfg.observation_window // 2
        ax, ay = self.positions[agent]
        window = np.empty((cfg.observation_window, cfg.observation_window), dtype=np.int8)
        agent_at = {pos: i for i, pos in enumerate(self.positions)}
        for dy in range(-half, half + 1):
            for dx in range(-half, half + 1):
                x, y = ax + dx, ay + dy
                terrain = self.grid.cell(x, y)
                if terrain == "wall":
                    code = OBS_WALL
                elif (x, y) in agent_at:
                    code = AGENT_BASE + self.structure.team_of(agent_at[(x, y)])
                elif terrain == "river":
                    code = OBS_WASTE if (x, y) in self.waste else OBS_RIVER
                elif terrain == "orchard":
                    code = OBS_APPLE if (x, y) in self.apples else OBS_ORCHARD
                else:
                    code = OBS_EMPTY
                window[dy + half, dx + half] = code
        return window

    def observe_all(self) -> list[np.ndarray]:
        return [self.render_observation(i) for i in range(self.config.num_agents)]

    def check_invariants(self):
        """Occupancy invariants; raises AssertionError on violation."""
        assert len(set(self.positions)) == len(self.positions), "agents share a cell"
        assert self.waste <= self.river_cells, "waste off the river"
        assert self.apples <= self.orchard_cells, "apples off the orchard"
        assert not (self.apples & set(self.positions)), "apple under an agent"


@dataclass
class EpisodeLog:
    """Per-agent counters accumulated over one episode."""

    apples: list[int]
    cleans: list[int]
    punishes: list[int]
    exo_reward: list[float]
    credo_reward: list[float]
    population_exo_per_step: float
    final_quarter_exo_per_step: float


def run_cleanup_episode(config: CleanupConfig, policies, rng: np.random.Generator,
                        env: CleanupEnv | None = None) -> EpisodeLog:
    """Step a fresh episode to completion under one policy per agent.

    A policy is any callable mapping an observation window to an action.
    """
    if len(policies) != config.num_agents:
        raise ConfigurationError(f"{len(policies)} policies for {config.num_agents} agents")
    if env is None:
        env = CleanupEnv(config)
    else:
        env.reset()
    n = config.num_agents
    exo_total = np.zeros(n)
    credo_total = np.zeros(n)
    exo_sum = 0.0
    fq_exo_sum = 0.0
    fq_start = config.episode_length - config.episode_length // 4
    done = False
    while not done:
        observations = env.observe_all()
        actions = [policies[i](observations[i]) for i in range(n)]
        exo, credo_rewards, done = env.step(actions, rng)
        exo_total += exo
        credo_total += credo_rewards
        exo_sum += float(exo.sum())
        if env.timestep > fq_start:
            fq_exo_sum += float(exo.sum())
    fq_steps = config.episode_length // 4
    return EpisodeLog(
        apples=list(env.apples_picked),
        cleans=list(env.clean_actions),
        punishes=list(env.punish_actions),
        exo_reward=[float(v) for v in exo_total],
        credo_reward=[float(v) for v in credo_total],
        population_exo_per_step=exo_sum / config.episode_length,
        final_quarter_exo_per_step=fq_exo_sum / fq_steps if fq_steps else float("nan"),
    )
