import numpy as np
import pytest

from credosim import cleanup as cl
from credosim.cleanup import (
    CleanupConfig,
    CleanupEnv,
    GridMap,
    apple_spawn_probability,
    run_cleanup_episode,
    waste_density,
)
from credosim.credo import CredoVector
from credosim.errors import ConfigurationError, ValidationError
from credosim.learners import ScriptedCleanupRole
from credosim.rng import make_rng

SMALL_MAP = """\
#########
#RR...OO#
#RR0.1OO#
#RR...OO#
#RR2.3OO#
#RR...OO#
#########
"""


def _config(num_agents=4, num_teams=2, **kwargs):
    defaults = dict(
        num_agents=num_agents,
        num_teams=num_teams,
        episode_length=50,
        credos=[CredoVector(0, 0, 1)] * num_agents,
    )
    defaults.update(kwargs)
    return CleanupConfig(**defaults)


def _env(**kwargs):
    return CleanupEnv(_config(**kwargs), grid=GridMap.from_ascii(SMALL_MAP))


def test_map_loading_and_validation():
    grid = GridMap.from_ascii(SMALL_MAP)
    assert grid.width == 9 and grid.height == 7
    assert len(grid.river_cells) == 10
    assert len(grid.orchard_cells) == 10
    assert grid.spawn_points == ((3, 2), (5, 2), (3, 4), (5, 4))
    with pytest.raises(ConfigurationError):
        GridMap.from_ascii("###\n#R#\n###")  # no orchard
    with pytest.raises(ConfigurationError):
        GridMap.from_ascii("RO\nRO")  # no wall border
    with pytest.raises(ConfigurationError):
        GridMap.from_ascii("####\n#R0O\n####\n".replace("0O", "00"))  # duplicate spawn


def test_default_map_regions():
    grid = GridMap.default()
    assert grid.width == 27 and grid.height == 20
    assert len(grid.river_cells) == 198
    assert len(grid.orchard_cells) == 216
    assert len(grid.spawn_points) == 6
    assert grid.river_cells.isdisjoint(grid.orchard_cells)


def test_waste_density_examples():
    env = _env()
    assert waste_density(env) == 0.0
    env.waste = set(env.river_cells)
    assert waste_density(env) == 1.0
    env.waste = set(list(env.river_cells)[:5])  # 5 of 10 river cells
    assert waste_density(env) == 0.5


def test_apple_spawn_probability_shape():
    cfg = _config(apple_respawn_rate=0.08, waste_threshold_depletion=0.4,
                  waste_threshold_restored=0.1)
    assert apple_spawn_probability(0.4, cfg) == 0.0
    assert apple_spawn_probability(0.9, cfg) == 0.0
    assert apple_spawn_probability(0.0, cfg) == 0.08
    assert apple_spawn_probability(0.1, cfg) == 0.08
    midway = (0.4 + 0.1) / 2
    assert apple_spawn_probability(midway, cfg) == pytest.approx(0.04)
    # decreasing in density between the thresholds
    densities = np.linspace(0.1, 0.4, 7)
    probs = [apple_spawn_probability(d, cfg) for d in densities]
    assert all(a >= b for a, b in zip(probs, probs[1:]))


def test_config_validation():
    with pytest.raises(ConfigurationError):
        _config(num_agents=5, num_teams=2)
    with pytest.raises(ValidationError):
        _config(waste_threshold_restored=0.5, waste_threshold_depletion=0.4)
    with pytest.raises(ValidationError):
        _config(beam_width=2)
    with pytest.raises(ValidationError):
        _config(punish_penalty_hit=1.0)


def test_all_stay_no_rewards():
    env = _env()
    exo, credo_r, done = env.step([cl.STAY] * 4, make_rng(0))
    assert np.array_equal(exo, np.zeros(4))
    assert np.array_equal(credo_r, np.zeros(4))
    assert not done


def test_apple_consumption():
    env = _env(waste_spawn_prob=0.0, apple_respawn_rate=0.0)
    env.apples.add((6, 2))  # orchard cell east of agent 1 at (5, 2)
    exo, _, _ = env.step([cl.STAY, cl.RIGHT, cl.STAY, cl.STAY], make_rng(0))
    assert exo[1] == 1.0
    assert (6, 2) not in env.apples
    assert env.positions[1] == (6, 2)
    assert env.apples_picked[1] == 1


def test_system_credo_shares_single_apple():
    env = _env(waste_spawn_prob=0.0, apple_respawn_rate=0.0)
    env.apples.add((6, 2))
    _, credo_r, _ = env.step([cl.STAY, cl.RIGHT, cl.STAY, cl.STAY], make_rng(0))
    assert np.allclose(credo_r, 1.0 / 4)


def test_movement_wall_blocks():
    env = _env()
    start = env.positions[0]  # (3, 2)
    env.step([cl.UP, cl.STAY, cl.STAY, cl.STAY], make_rng(0))
    assert env.positions[0] == (start[0], start[1] - 1)
    env.step([cl.UP, cl.STAY, cl.STAY, cl.STAY], make_rng(0))
    assert env.positions[0] == (start[0], start[1] - 1)  # wall above


def test_movement_conflict_single_winner():
    env = _env()
    # agents 0 at (3,2) and 1 at (5,2) both move toward (4,2)
    winners = set()
    for seed in range(12):
        env.reset()
        env.step([cl.RIGHT, cl.LEFT, cl.STAY, cl.STAY], make_rng(seed))
        occupied = [env.positions[0], env.positions[1]]
        assert (4, 2) in occupied
        assert len(set(occupied)) == 2
        winners.add(0 if env.positions[0] == (4, 2) else 1)
    assert winners == {0, 1}  # both can win the contested cell


def test_movement_cascade_block():
    env = _env()
    # agent 1 at (5,2) tries to move onto agent 0 at (3,2)? not adjacent; use 0 -> stay, 1 -> left twice
    env.step([cl.STAY, cl.LEFT, cl.STAY, cl.STAY], make_rng(0))
    assert env.positions[1] == (4, 2)
    env.step([cl.STAY, cl.LEFT, cl.STAY, cl.STAY], make_rng(0))
    assert env.positions[1] == (4, 2)  # blocked by stationary agent 0 at (3,2)


def test_turning_changes_beam_direction():
    env = _env()
    assert env.orientations[0] == cl.WEST
    env.step([cl.TURN_RIGHT, cl.STAY, cl.STAY, cl.STAY], make_rng(0))
    assert env.orientations[0] == cl.NORTH
    env.step([cl.TURN_LEFT, cl.STAY, cl.STAY, cl.STAY], make_rng(0))
    assert env.orientations[0] == cl.WEST


def test_clean_beam_clears_footprint_only():
    env = _env(waste_spawn_prob=0.0)
    env.waste |= {(1, 2), (2, 2), (1, 1), (2, 4)}  # (2,4) is outside the beam
    env.step([cl.CLEAN_BEAM, cl.STAY, cl.STAY, cl.STAY], make_rng(0))
    assert env.waste == {(2, 4)}
    assert env.clean_actions[0] == 1


def test_punish_beam_penalties():
    env = _env()
    # agent 1 at (5,2) faces west; agent 0 at (3,2) sits in its footprint
    exo, _, _ = env.step([cl.STAY, cl.PUNISH_BEAM, cl.STAY, cl.STAY], make_rng(0))
    assert exo[1] == env.config.punish_cost_firer
    assert exo[0] == env.config.punish_penalty_hit
    assert env.punish_actions[1] == 1


def test_waste_spawns_only_below_depletion_threshold():
    env = _env(waste_spawn_prob=1.0, waste_threshold_depletion=0.3)
    rng = make_rng(0)
    for _ in range(40):
        env.step([cl.STAY] * 4, rng)
    assert waste_density(env) >= 0.3
    level = len(env.waste)
    for _ in range(10):
        env.step([cl.STAY] * 4, rng)
    assert len(env.waste) == level  # saturation: no spawns at or above threshold


def test_apple_count_never_increases_at_depletion():
    env = _env(waste_spawn_prob=0.0, apple_respawn_rate=0.5)
    env.waste = set(list(env.river_cells)[:5])  # density 0.5 >= depletion 0.4
    env.apples.add((6, 4))
    rng = make_rng(1)
    for _ in range(20):
        before = len(env.apples)
        env.step([cl.STAY] * 4, rng)
        assert len(env.apples) <= before


def test_render_observation_padding_and_team_colors():
    env = _env(observation_window=7)
    obs = env.render_observation(0)  # agent 0 at (3,2), half = 3
    assert obs.shape == (7, 7)
    assert obs[3, 3] == cl.AGENT_BASE + 0  # observer shows its own team color
    assert obs[0, 0] == cl.OBS_WALL  # padding beyond the map edge
    # teammate (agent 1, same team) two cells east of agent 0
    assert obs[3, 5] == cl.AGENT_BASE + 0
    # other-team agent 2 at (3,4): two cells south
    assert obs[5, 3] == cl.AGENT_BASE + 1
    # river to the west, orchard to the east
    assert obs[3, 1] == cl.OBS_RIVER
    assert obs[3, 6] == cl.OBS_ORCHARD


def test_render_observation_waste_and_apples():
    env = _env(observation_window=7)
    env.waste.add((2, 2))
    env.apples.add((6, 2))
    obs = env.render_observation(0)
    assert obs[3, 2] == cl.OBS_WASTE
    obs1 = env.render_observation(1)  # agent 1 at (5,2)
    assert obs1[3, 4] == cl.OBS_APPLE


def test_step_rejects_bad_actions():
    env = _env()
    with pytest.raises(ValidationError):
        env.step([cl.STAY] * 3, make_rng(0))
    with pytest.raises(ValidationError):
        env.step([99, cl.STAY, cl.STAY, cl.STAY], make_rng(0))


def test_fuzz_invariants_and_budget_balance():
    credos = [CredoVector(0.3, 0.3, 0.4)] * 4
    env = _env(credos=credos)
    rng = make_rng(42)
    for _ in range(2000):
        if env.timestep >= env.config.episode_length:
            env.reset()
        actions = [int(rng.random() * cl.NUM_ACTIONS) for _ in range(4)]
        exo, credo_r, _ = env.step(actions, rng)
        env.check_invariants()
        assert abs(float(exo.sum()) - float(credo_r.sum())) < 1e-9


def test_replay_is_bit_identical():
    def run(seed):
        env = _env(episode_length=200)
        rng = make_rng(seed)
        for _ in range(200):
            actions = [int(rng.random() * cl.NUM_ACTIONS) for _ in range(4)]
            env.step(actions, rng)
        return (sorted(env.waste), sorted(env.apples), env.positions, env.orientations,
                env.apples_picked, env.clean_actions)

    assert run(9) == run(9)


def test_scripted_episode_division_of_labor():
    cfg = CleanupConfig(episode_length=300, credos=[CredoVector(0, 0, 1)] * 6)
    bots = [ScriptedCleanupRole("cleaner", lane=0), ScriptedCleanupRole("cleaner", lane=1),
            ScriptedCleanupRole("picker"), ScriptedCleanupRole("picker"),
            ScriptedCleanupRole("picker"), ScriptedCleanupRole("picker")]
    log = run_cleanup_episode(cfg, bots, make_rng(12))
    assert sum(log.apples[2:]) > 0
    assert log.apples[0] == log.apples[1] == 0
    assert log.cleans[0] > 0 and log.cleans[1] > 0
    assert log.population_exo_per_step > 0
    # consumed apples are the only positive exogenous reward
    assert sum(log.exo_reward) == pytest.approx(sum(log.apples))


def test_all_pickers_saturate_the_river():
    cfg = CleanupConfig(episode_length=400, credos=[CredoVector(0, 0, 1)] * 6)
    env = CleanupEnv(cfg)
    log = run_cleanup_episode(cfg, [ScriptedCleanupRole("picker") for _ in range(6)],
                              make_rng(4), env=env)
    density = waste_density(env)
    assert density >= cfg.waste_threshold_depletion
    assert apple_spawn_probability(density, cfg) == 0.0


def test_episode_log_matches_counters():
    cfg = CleanupConfig(episode_length=120, credos=[CredoVector(1, 0, 0)] * 6)
    log = run_cleanup_episode(cfg, [ScriptedCleanupRole("picker") for _ in range(6)],
                              make_rng(8))
    assert log.apples == [int(v) for v in log.exo_reward]  # +1 per apple, no punishments
