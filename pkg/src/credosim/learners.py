"""Decision-and-update policies.

The workhorse is a tabular value learner over the team-signal observation of
the matrix game: a contextual-bandit update (no bootstrapping) because
consecutive observations are independent draws, which makes the next-state
term pure noise. Scripted river-cleaner and apple-picker bots validate the
gridworld, and a small clipped-surrogate policy-gradient learner is included
for gridworld training experiments.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import cleanup as cl
from .errors import ValidationError
from .rng import randbelow

logger = logging.getLogger(__name__)

ACTION_C, ACTION_D = 0, 1


@dataclass(frozen=True)
class LearnerConfig:
    learning_rate: float = 0.05
    discount: float = 0.99
    epsilon_start: float = 1.0
    epsilon_end: float = 0.01
    epsilon_decay_episodes: int = 1

    def __post_init__(self):
        if not (0.0 < self.learning_rate <= 1.0):
            raise ValidationError(f"learning_rate {self.learning_rate} outside (0, 1]")
        if not (0.0 <= self.discount < 1.0):
            raise ValidationError(f"discount {self.discount} outside [0, 1)")
        for name in ("epsilon_start", "epsilon_end"):
            v = getattr(self, name)
            if not (0.0 <= v <= 1.0):
                raise ValidationError(f"{name} {v} outside [0, 1]")
        if self.epsilon_start < self.epsilon_end:
            raise ValidationError("epsilon_start must be >= epsilon_end")
        if self.epsilon_decay_episodes < 1:
            raise ValidationError("epsilon_decay_episodes must be positive")


def epsilon_schedule(config: LearnerConfig, episode: int) -> float:
    """Linear decay from start to end, flat afterwards; hits end exactly at
    epsilon_decay_episodes."""
    if episode >= config.epsilon_decay_episodes:
        return config.epsilon_end
    return config.epsilon_start + (config.epsilon_end - config.epsilon_start) * (
        episode / config.epsilon_decay_episodes
    )


@dataclass
class TabularPolicy:
    """Action values indexed by (team-signal state, action C=0/D=1)."""

    q: np.ndarray

    @classmethod
    def zeros(cls, num_states: int, num_actions: int = 2) -> "TabularPolicy":
        return cls(q=np.zeros((num_states, num_actions), dtype=np.float64))


def select_action(policy: TabularPolicy, state: int, epsilon: float,
                  rng: np.random.Generator) -> int:
    """Epsilon-greedy with uniform tie-breaking (same draw order as the kernels)."""
    if not (0 <= state < policy.q.shape[0]):
        raise ValidationError(f"state {state} out of range")
    u = rng.random()
    if u < epsilon:
        return int(rng.random() * policy.q.shape[1])
    row = policy.q[state]
    best = np.flatnonzero(row == row.max())
    if len(best) == 1:
        return int(best[0])
    if len(best) == policy.q.shape[1]:
        return int(rng.random() * policy.q.shape[1])
    return int(best[randbelow(rng, len(best))])


def update(policy: TabularPolicy, state: int, action: int, credo_reward: float,
           config: LearnerConfig) -> TabularPolicy:
    """One contextual-bandit step toward the observed credo reward."""
    if not math.isfinite(credo_reward):
        raise ValidationError(f"non-finite reward {credo_reward}")
    policy.q[state, action] += config.learning_rate * (credo_reward - policy.q[state, action])
    return policy


def dump_q_csv(policies: list[TabularPolicy], path) -> None:
    """Policy snapshot: one row per (agent_id, state, action, q)."""
    with open(path, "w") as fh:
        fh.write("agent_id,state,action,q\n")
        for agent, policy in enumerate(policies):
            for state in range(policy.q.shape[0]):
                for action in range(policy.q.shape[1]):
                    fh.write(f"{agent},{state},{action},{float(policy.q[state, action])!r}\n")


# --- scripted gridworld roles -------------------------------------------------


def _is_blocking(code: int) -> bool:
    return code == cl.OBS_WALL or code >= cl.AGENT_BASE


@dataclass
class ScriptedCleanupRole:
    """Reactive river-cleaner / apple-picker used to validate the gridworld.

    Cleaners hold a patrol lane west of the spawn corridor (lane 0 hugs the
    river's east edge, lane 1 sits six cells off the west wall so the two
    beams tile the river), sweep vertically, and fire whenever waste enters
    the beam footprint. Both roles assume the westward initial facing and
    never turn. `patrol_dir` is the only mutable state.
    """

    role: str  # "cleaner" or "picker"
    lane: int = 0
    patrol_dir: int = cl.DOWN

    def __post_init__(self):
        if self.role not in ("cleaner", "picker"):
            raise ValidationError(f"unknown scripted role {self.role!r}")
        if self.role == "cleaner" and self.lane not in (0, 1):
            raise ValidationError("cleaner lane must be 0 (river edge) or 1 (deep)")

    def reset(self) -> None:
        self.patrol_dir = cl.DOWN

    def __call__(self, observation: np.ndarray) -> int:
        return scripted_step(self, observation)


def _patrol(role: ScriptedCleanupRole, look) -> int:
    step = -1 if role.patrol_dir == cl.UP else 1
    if _is_blocking(look(0, step)):
        role.patrol_dir = cl.UP if role.patrol_dir == cl.DOWN else cl.DOWN
        step = -step
        if _is_blocking(look(0, step)):
            return cl.STAY
    return cl.UP if step < 0 else cl.DOWN


def _cleaner_step(role: ScriptedCleanupRole, obs: np.ndarray, half: int, look) -> int:
    # fire whenever waste sits in the westward beam footprint
    for dx in range(-1, -6, -1):
        for dy in (-1, 0, 1):
            if abs(dx) <= half and abs(dy) <= half and look(dx, dy) == cl.OBS_WASTE:
                return cl.CLEAN_BEAM
    if role.lane == 1:
        # align six cells east of the west wall
        wall_dx = None
        for dx in range(-1, -half - 1, -1):
            if look(dx, 0) == cl.OBS_WALL:
                wall_dx = dx
                break
        if wall_dx is None or wall_dx < -6:
            target = cl.LEFT
        elif wall_dx > -6:
            target = cl.RIGHT
        else:
            return _patrol(role, look)
    else:
        west = look(-1, 0)
        east = look(1, 0)
        if west in (cl.OBS_RIVER, cl.OBS_WASTE):
            return _patrol(role, look)
        if east in (cl.OBS_RIVER, cl.OBS_WASTE):
            target = cl.RIGHT  # drifted into the river; back out east
        else:
            target = cl.LEFT
    dx = -1 if target == cl.LEFT else 1
    if _is_blocking(look(dx, 0)):
        return _patrol(role, look)
    return target


def _picker_step(role: ScriptedCleanupRole, obs: np.ndarray, half: int, look) -> int:
    nearest = None
    for dy in range(-half, half + 1):
        for dx in range(-half, half + 1):
            if look(dx, dy) == cl.OBS_APPLE:
                key = (abs(dx) + abs(dy), dy, dx)
                if nearest is None or key < nearest:
                    nearest = key
    if nearest is not None:
        _, dy, dx = nearest
        prefer = []
        horizontal = cl.LEFT if dx < 0 else cl.RIGHT
        vertical = cl.UP if dy < 0 else cl.DOWN
        if dx != 0 and (abs(dx) >= abs(dy) or dy == 0):
            prefer = [horizontal] + ([vertical] if dy != 0 else [])
        else:
            prefer = [vertical] + ([horizontal] if dx != 0 else [])
        for move in prefer:
            mdx, mdy = {cl.LEFT: (-1, 0), cl.RIGHT: (1, 0), cl.UP: (0, -1), cl.DOWN: (0, 1)}[move]
            if not _is_blocking(look(mdx, mdy)):
                return move
        return cl.STAY
    if look(1, 0) == cl.OBS_ORCHARD:
        return cl.RIGHT  # drift into / across the orchard
    return _patrol(role, look)


def scripted_step(role: ScriptedCleanupRole, observation: np.ndarray) -> int:
    """Map an observation window to an action for a scripted role."""
    half = observation.shape[0] // 2

    def look(dx: int, dy: int) -> int:
        x, y = half + dx, half + dy
        if 0 <= x < observation.shape[1] and 0 <= y < observation.shape[0]:
            return int(observation[y, x])
        return cl.OBS_WALL

    if role.role == "cleaner":
        return _cleaner_step(role, observation, half, look)
    return _picker_step(role, observation, half, look)


# --- toy clipped-surrogate policy gradient ------------------------------------


@dataclass
class SoftmaxPolicy:
    """Tabular softmax policy with one logit row per state."""

    params: np.ndarray

    @classmethod
    def zeros(cls, num_states: int, num_actions: int) -> "SoftmaxPolicy":
        return cls(params=np.zeros((num_states, num_actions), dtype=np.float64))

    def probs(self, state: int) -> np.ndarray:
        logits = self.params[state]
        z = np.exp(logits - logits.max())
        return z / z.sum()

    def log_prob(self, state: int, action: int) -> float:
        return float(np.log(self.probs(state)[action]))


@dataclass
class ValueBaseline:
    """Per-state running value estimate used for advantages."""

    values: np.ndarray
    step_size: float = 0.1

    @classmethod
    def zeros(cls, num_states: int) -> "ValueBaseline":
        return cls(values=np.zeros(num_states, dtype=np.float64))

    def advantages(self, states, returns) -> np.ndarray:
        return np.asarray(returns, dtype=np.float64) - self.values[np.asarray(states)]

    def fit(self, states, returns) -> None:
        for s, g in zip(states, returns):
            self.values[s] += self.step_size * (g - self.values[s])


@dataclass
class TrajectoryBatch:
    """Flattened (state, action, return) steps with collection-time log-probs."""

    states: list[int]
    actions: list[int]
    returns: list[float]
    old_log_probs: list[float] = field(default_factory=list)


def clipped_surrogate(policy: SoftmaxPolicy, batch: TrajectoryBatch,
                      advantages: np.ndarray, clip: float = 0.2) -> float:
    """Mean clipped-surrogate objective of the batch under the policy."""
    total = 0.0
    for s, a, old_lp, adv in zip(batch.states, batch.actions, batch.old_log_probs, advantages):
        ratio = math.exp(policy.log_prob(s, a) - old_lp)
        clipped = min(max(ratio, 1.0 - clip), 1.0 + clip)
        total += min(ratio * adv, clipped * adv)
    return total / len(batch.states)


def policy_gradient_update(policy: SoftmaxPolicy, batch: TrajectoryBatch,
                           config: LearnerConfig, baseline: ValueBaseline,
                           clip: float = 0.2) -> SoftmaxPolicy:
    """One ascent step on the clipped surrogate; advantages from the baseline.

    Improvement is not guaranteed per step. A batch whose advantages are all
    zero carries no signal and is skipped with a warning.
    """
    if not batch.states:
        raise ValidationError("empty trajectory batch")
    if len(batch.old_log_probs) != len(batch.states):
        raise ValidationError("batch is missing collection-time log-probs")
    advantages = baseline.advantages(batch.states, batch.returns)
    if not np.any(advantages):
        logger.warning("degenerate batch: all advantages are zero; skipping update")
        return policy
    grad = np.zeros_like(policy.params)
    for s, a, old_lp, adv in zip(batch.states, batch.actions, batch.old_log_probs, advantages):
        probs = policy.probs(s)
        ratio = math.exp(math.log(probs[a]) - old_lp)
        clipped = min(max(ratio, 1.0 - clip), 1.0 + clip)
        if ratio * adv <= clipped * adv:  # unclipped branch active in the min
            dlogp = -probs
            dlogp[a] += 1.0
            grad[s] += adv * ratio * dlogp
    grad /= len(batch.states)
    policy.params = policy.params + config.learning_rate * grad
    baseline.fit(batch.states, batch.returns)
    return policy
