"""Experiment harness: config files, sweeps, seed management, CSV emission.

A config is a YAML document selecting an environment (`ipd`, `cleanup`, or
`incentive`) with an environment block, an optional credo-sweep increment,
and a list of seeds. Every (sweep point x seed) combination runs with a seed
derived stably from the listed seed and the sweep position, so reruns and
out-of-order execution reproduce byte-identical CSVs.
"""

from __future__ import annotations

import dataclasses
import json
import os
import warnings
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .cleanup import NUM_ACTIONS, CleanupConfig, CleanupEnv, EpisodeLog, run_cleanup_episode
from .credo import CredoVector
from .errors import ConfigurationError, ValidationError
from .incentives import StageGameParams, incentive_grid, simplex_lattice
from .ipd import IPDConfig, run_ipd_experiment
from .learners import ScriptedCleanupRole
from .metrics import equality
from .rng import config_hash, derive_seed, make_rng

ENVIRONMENTS = ("ipd", "cleanup", "incentive")

INCENTIVE_HEADER = "psi,phi,omega,nu,b,c,num_teams,incentive"
IPD_WINDOW_HEADER = "seed,episode_window,coop_total,coop_in_team,coop_out_team,mean_credo_reward"
IPD_SUMMARY_HEADER = (
    "seed,psi,phi,omega,nu,b,c,mean_credo_reward,equality,coop_total,coop_in_team,coop_out_team"
)
CLEANUP_SUMMARY_HEADER = "seed,psi,phi,omega,mean_credo_reward,equality"
CLEANUP_AGENTS_HEADER = "seed,agent_id,team,apples,cleans,punishes,exo_reward,credo_reward"
CLEANUP_EPISODES_HEADER = "episode,agent_id,team,apples,cleans,punishes,exo_reward,credo_reward"


def _fmt(value) -> str:
    if value is None:
        return "nan"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return repr(float(value))


@dataclass
class ExperimentConfig:
    environment: str
    env: dict
    seeds: list[int]
    output_dir: Path
    credo_sweep: float | None = None

    def __post_init__(self):
        if self.environment not in ENVIRONMENTS:
            raise ConfigurationError(
                f"environment {self.environment!r} not one of {ENVIRONMENTS}"
            )
        if not self.seeds:
            raise ConfigurationError("at least one seed is required")
        self.output_dir = Path(os.environ.get("CREDOSIM_OUTPUT_DIR", self.output_dir))

    def as_dict(self) -> dict:
        return {
            "environment": self.environment,
            "env": self.env,
            "seeds": list(self.seeds),
            "credo_sweep": self.credo_sweep,
        }


@dataclass
class RunManifest:
    config_hash: str
    seed: int
    engine_version: str
    started_at: str
    finished_at: str
    outputs: list[str]

    def write(self, path: Path) -> None:
        path.write_text(json.dumps(dataclasses.asdict(self), indent=2, sort_keys=True) + "\n")


def load_config(path) -> ExperimentConfig:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise ConfigurationError(f"cannot load config {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigurationError(f"config {path} is not a mapping")
    try:
        return ExperimentConfig(
            environment=raw["environment"],
            env=raw.get("env", {}),
            seeds=list(raw.get("seeds", [])),
            output_dir=Path(raw.get("output_dir", "results")),
            credo_sweep=raw.get("credo_sweep"),
        )
    except KeyError as exc:
        raise ConfigurationError(f"config {path} is missing key {exc}") from exc


def generate_credo_sweep(increment: float) -> list[CredoVector]:
    """All simplex lattice credos at the given step (0.2 -> 21 vectors)."""
    return simplex_lattice(increment)


def _credo_from(value) -> CredoVector:
    if isinstance(value, CredoVector):
        return value
    if isinstance(value, (list, tuple)) and len(value) == 3:
        return CredoVector.normalized(*(float(v) for v in value))
    raise ConfigurationError(f"cannot interpret credo {value!r}")


def _check_clobber(paths: list[Path], force: bool) -> None:
    existing = [str(p) for p in paths if p.exists()]
    if existing and not force:
        raise ConfigurationError(
            "refusing to overwrite existing results (use --force): " + ", ".join(existing)
        )


class _CsvWriter:
    def __init__(self, path: Path, header: str):
        self.path = path
        self.rows = [header]

    def add(self, *values) -> None:
        self.rows.append(",".join(_fmt(v) for v in values))

    def write(self) -> None:
        self.path.write_text("\n".join(self.rows) + "\n")


def _now() -> str:
    return datetime.now(timezone.utc).isoformat()


def run(config: ExperimentConfig, force: bool = False) -> list[RunManifest]:
    """Execute every (sweep point x seed) combination and write result CSVs."""
    out = config.output_dir
    out.mkdir(parents=True, exist_ok=True)
    digest = config_hash(config.as_dict())
    if config.environment == "incentive":
        return _run_incentive(config, digest, force)
    if config.environment == "ipd":
        return _run_ipd(config, digest, force)
    return _run_cleanup(config, digest, force)


def _sweep_credos(config: ExperimentConfig) -> list[CredoVector | None]:
    if config.credo_sweep is not None:
        return list(generate_credo_sweep(config.credo_sweep))
    return [None]  # single point: the env block's own credo


def _run_incentive(config: ExperimentConfig, digest: str, force: bool) -> list[RunManifest]:
    env = config.env
    b = float(env.get("b", 5.0))
    cs = env.get("c", [1.0, 2.0, 3.0])
    nus = env.get("nu", [0.06, 0.2, 0.5])
    cs = [float(c) for c in (cs if isinstance(cs, list) else [cs])]
    nus = [float(nu) for nu in (nus if isinstance(nus, list) else [nus])]
    num_teams = int(env.get("num_teams", 5))
    increment = float(env.get("increment", 0.02))
    plans = [(nu, c) for nu in nus for c in cs]
    paths = [config.output_dir / f"incentive_nu{nu}_c{c}.csv" for nu, c in plans]
    _check_clobber(paths, force)
    manifests = []
    for (nu, c), path in zip(plans, paths):
        started = _now()
        grid = incentive_grid(StageGameParams(b=b, c=c, nu=nu, num_teams=num_teams), increment)
        writer = _CsvWriter(path, INCENTIVE_HEADER)
        for credo, value in grid.entries:
            writer.add(credo.psi, credo.phi, credo.omega, nu, b, c, num_teams, value)
        writer.write()
        manifest = RunManifest(digest, 0, __version__, started, _now(), [str(path)])
        manifest.write(path.with_suffix(".manifest.json"))
        manifests.append(manifest)
    return manifests


def _run_ipd(config: ExperimentConfig, digest: str, force: bool) -> list[RunManifest]:
    env = dict(config.env)
    base_credo = env.pop("credo", [1.0, 0.0, 0.0])
    sweep = _sweep_credos(config)
    paths = [
        config.output_dir / f"ipd_windows_sweep{si:03d}_seed{seed}.csv"
        for si in range(len(sweep))
        for seed in config.seeds
    ]
    summary_path = config.output_dir / "ipd_summary.csv"
    _check_clobber(paths + [summary_path], force)
    summary = _CsvWriter(summary_path, IPD_SUMMARY_HEADER)
    manifests = []
    pi = 0
    for si, sweep_credo in enumerate(sweep):
        credo = sweep_credo if sweep_credo is not None else _credo_from(base_credo)
        for seed_index, seed in enumerate(config.seeds):
            started = _now()
            run_seed = derive_seed(seed, si, seed_index)
            n = int(env.get("population_size", 25))
            ipd_config = IPDConfig(
                population_size=n,
                num_teams=int(env.get("num_teams", 5)),
                nu=float(env.get("nu", 0.2)),
                b=float(env.get("b", 5.0)),
                c=float(env.get("c", 1.0)),
                episodes=int(env.get("episodes", 100_000)),
                window=int(env.get("window", 2000)),
                seed=run_seed,
                credos=[credo] * n,
            )
            result = run_ipd_experiment(ipd_config)
            writer = _CsvWriter(paths[pi], IPD_WINDOW_HEADER)
            for w in result.windows:
                writer.add(seed, w.window_index, w.coop_total, w.coop_in_team,
                           w.coop_out_team, w.mean_credo_reward)
            writer.write()
            summary.add(seed, credo.psi, credo.phi, credo.omega, ipd_config.nu,
                        ipd_config.b, ipd_config.c, result.mean_credo_reward,
                        result.equality, result.coop_total, result.coop_in_team,
                        result.coop_out_team)
            manifest = RunManifest(digest, seed, __version__, started, _now(),
                                   [str(paths[pi])])
            manifest.write(paths[pi].with_suffix(".manifest.json"))
            manifests.append(manifest)
            pi += 1
    summary.write()
    return manifests


def _scripted_policies(env: dict, num_agents: int):
    kind = env.get("policies", "scripted")
    if kind == "scripted":
        cleaners = int(env.get("cleaners", 2))
        if cleaners > num_agents:
            raise ConfigurationError(f"{cleaners} cleaners for {num_agents} agents")
        return [
            ScriptedCleanupRole("cleaner", lane=i % 2) if i < cleaners
            else ScriptedCleanupRole("picker")
            for i in range(num_agents)
        ]
    if kind == "random":
        return None
    raise ConfigurationError(f"unknown cleanup policies {kind!r}")


def _run_cleanup(config: ExperimentConfig, digest: str, force: bool) -> list[RunManifest]:
    env = dict(config.env)
    base_credo = env.pop("credo", [0.0, 0.0, 1.0])
    episodes = int(env.get("episodes", 1))
    sweep = _sweep_credos(config)
    agent_paths: list[Path] = []
    episode_paths: list[Path] = []
    for si in range(len(sweep)):
        for seed in config.seeds:
            agent_paths.append(config.output_dir / f"cleanup_agents_sweep{si:03d}_seed{seed}.csv")
            episode_paths.append(config.output_dir / f"cleanup_episodes_sweep{si:03d}_seed{seed}.csv")
    summary_path = config.output_dir / "cleanup_summary.csv"
    _check_clobber(agent_paths + episode_paths + [summary_path], force)
    summary = _CsvWriter(summary_path, CLEANUP_SUMMARY_HEADER)
    manifests = []
    pi = 0
    for si, sweep_credo in enumerate(sweep):
        credo = sweep_credo if sweep_credo is not None else _credo_from(base_credo)
        for seed_index, seed in enumerate(config.seeds):
            started = _now()
            run_seed = derive_seed(seed, si, seed_index)
            num_agents = int(env.get("num_agents", 6))
            cfg = CleanupConfig(
                num_agents=num_agents,
                num_teams=int(env.get("num_teams", 3)),
                episode_length=int(env.get("episode_length", 1000)),
                seed=run_seed,
                credos=[credo] * num_agents,
            )
            policies = _scripted_policies(env, num_agents)
            rng = make_rng(run_seed)
            sim = CleanupEnv(cfg)
            agents_csv = _CsvWriter(agent_paths[pi], CLEANUP_AGENTS_HEADER)
            episodes_csv = _CsvWriter(episode_paths[pi], CLEANUP_EPISODES_HEADER)
            totals = {
                "apples": [0] * num_agents,
                "cleans": [0] * num_agents,
                "punishes": [0] * num_agents,
                "exo": [0.0] * num_agents,
                "credo": [0.0] * num_agents,
            }
            for episode in range(episodes):
                if policies is None:
                    log = _run_random_episode(cfg, sim, rng)
                else:
                    for p in policies:
                        p.reset()
                    log = run_cleanup_episode(cfg, policies, rng, env=sim)
                for a in range(num_agents):
                    episodes_csv.add(episode, a, sim.structure.team_of(a), log.apples[a],
                                     log.cleans[a], log.punishes[a], log.exo_reward[a],
                                     log.credo_reward[a])
                    totals["apples"][a] += log.apples[a]
                    totals["cleans"][a] += log.cleans[a]
                    totals["punishes"][a] += log.punishes[a]
                    totals["exo"][a] += log.exo_reward[a]
                    totals["credo"][a] += log.credo_reward[a]
            for a in range(num_agents):
                agents_csv.add(seed, a, sim.structure.team_of(a), totals["apples"][a],
                               totals["cleans"][a], totals["punishes"][a],
                               totals["exo"][a], totals["credo"][a])
            agents_csv.write()
            episodes_csv.write()
            per_episode_credo = [v / episodes for v in totals["credo"]]
            summary.add(seed, credo.psi, credo.phi, credo.omega,
                        sum(per_episode_credo) / num_agents, equality(totals["credo"]))
            manifest = RunManifest(digest, seed, __version__, started, _now(),
                                   [str(agent_paths[pi]), str(episode_paths[pi])])
            manifest.write(agent_paths[pi].with_suffix(".manifest.json"))
            manifests.append(manifest)
            pi += 1
    summary.write()
    return manifests


def _run_random_episode(cfg: CleanupConfig, sim: CleanupEnv, rng):
    sim.reset()
    n = cfg.num_agents
    exo_total = np.zeros(n)
    credo_total = np.zeros(n)
    exo_sum = 0.0
    fq_exo = 0.0
    fq_start = cfg.episode_length - cfg.episode_length // 4
    done = False
    while not done:
        actions = [int(rng.random() * NUM_ACTIONS) for _ in range(n)]
        exo, credo_rewards, done = sim.step(actions, rng)
        exo_total += exo
        credo_total += credo_rewards
        exo_sum += float(exo.sum())
        if sim.timestep > fq_start:
            fq_exo += float(exo.sum())
    fq_steps = cfg.episode_length // 4
    return EpisodeLog(
        apples=list(sim.apples_picked),
        cleans=list(sim.clean_actions),
        punishes=list(sim.punish_actions),
        exo_reward=[float(v) for v in exo_total],
        credo_reward=[float(v) for v in credo_total],
        population_exo_per_step=exo_sum / cfg.episode_length,
        final_quarter_exo_per_step=fq_exo / fq_steps if fq_steps else float("nan"),
    )


def report(output_dir) -> dict[str, Path]:
    """Join per-run summaries into per-environment tables averaged over seeds."""
    out = Path(output_dir)
    written: dict[str, Path] = {}
    specs = {
        "ipd": ("ipd_summary.csv", ("psi", "phi", "omega", "nu", "b", "c")),
        "cleanup": ("cleanup_summary.csv", ("psi", "phi", "omega")),
    }
    for env, (name, keys) in specs.items():
        src = out / name
        if not src.exists():
            continue
        lines = src.read_text().strip().splitlines()
        header = lines[0].split(",")
        rows = [dict(zip(header, line.split(","))) for line in lines[1:]]
        groups: dict[tuple, list[dict]] = {}
        for row in rows:
            groups.setdefault(tuple(row[k] for k in keys), []).append(row)
        metric_cols = [h for h in header if h not in keys and h != "seed"]
        dest = out / f"report_{env}.csv"
        out_lines = [",".join(keys) + "," + ",".join(metric_cols) + ",seed_count"]
        expected = max(len(g) for g in groups.values()) if groups else 0
        for key in sorted(groups):
            group = groups[key]
            means = []
            for col in metric_cols:
                vals = [float(r[col]) for r in group]
                finite = [v for v in vals if not np.isnan(v)]
                means.append(sum(finite) / len(finite) if finite else float("nan"))
            if len(group) < expected:
                warnings.warn(
                    f"{env} cell {key} has {len(group)} of {expected} seeds", stacklevel=2
                )
            out_lines.append(
                ",".join(key) + "," + ",".join(_fmt(m) for m in means) + f",{len(group)}"
            )
        dest.write_text("\n".join(out_lines) + "\n")
        written[env] = dest
    incentive_files = sorted(out.glob("incentive_*.csv"))
    if incentive_files:
        dest = out / "report_incentive.csv"
        merged = [INCENTIVE_HEADER]
        for path in incentive_files:
            merged.extend(path.read_text().strip().splitlines()[1:])
        dest.write_text("\n".join(merged) + "\n")
        written["incentive"] = dest
    if not written:
        warnings.warn(f"no run summaries found in {out}", stacklevel=2)
    return written
