"""Reported measurements: cooperation splits, equality, division of labor.

Rates over empty categories are flagged as None rather than zero-filled, and
equality of an all-zero reward vector is a None sentinel (the inverse-Gini
denominator vanishes), never silently 0 or 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .credo import TeamStructure

SPECIALIZATION_RATIO = 10.0  # apples:cleans beyond 10:1 (or below 1:10) marks a role


@dataclass(frozen=True)
class CooperationWindow:
    window_index: int
    total_rate: float | None
    in_team_rate: float | None
    out_team_rate: float | None
    total_actions: int
    in_team_actions: int
    out_team_actions: int


@dataclass(frozen=True)
class EqualityReport:
    equality: float | None
    mean_reward: float


@dataclass(frozen=True)
class LaborTable:
    rows: tuple[tuple[int, int, int, str], ...]  # (agent, apples, cleans, role)
    specialization_index: float


def cooperation_rates(records, structure: TeamStructure, episode_range=None,
                      window_index: int = 0) -> CooperationWindow:
    """Classify both actions of each record by the pair's team relation.

    `episode_range` optionally restricts to records with
    start <= episode < end.
    """
    in_coop = in_n = out_coop = out_n = 0
    for rec in records:
        if episode_range is not None:
            start, end = episode_range
            if not (start <= rec.episode < end):
                continue
        same = structure.team_of(rec.pairing.focal) == structure.team_of(rec.pairing.counterpart)
        coop = (1 if rec.focal_action == 0 else 0) + (1 if rec.counterpart_action == 0 else 0)
        if same:
            in_coop += coop
            in_n += 2
        else:
            out_coop += coop
            out_n += 2

    def rate(coop, n):
        return coop / n if n > 0 else None

    return CooperationWindow(
        window_index=window_index,
        total_rate=rate(in_coop + out_coop, in_n + out_n),
        in_team_rate=rate(in_coop, in_n),
        out_team_rate=rate(out_coop, out_n),
        total_actions=in_n + out_n,
        in_team_actions=in_n,
        out_team_actions=out_n,
    )


def equality(rewards) -> float | None:
    """Inverse Gini index: 1 - sum |Ri - Rj| / (2 N^2 mean); None when mean is 0."""
    r = np.asarray(rewards, dtype=np.float64)
    n = r.size
    mean = r.mean()
    if mean == 0.0:
        return None
    diffs = np.abs(r[:, None] - r[None, :]).sum()
    return float(1.0 - diffs / (2.0 * n * n * mean))


def equality_report(rewards) -> EqualityReport:
    r = np.asarray(rewards, dtype=np.float64)
    return EqualityReport(equality=equality(r), mean_reward=float(r.mean()))


def mean_population_reward(rewards) -> float:
    """Mean per-agent reward; accepts one period or a [periods, agents] stack."""
    r = np.asarray(rewards, dtype=np.float64)
    if r.size == 0:
        raise ValueError("empty reward array")
    return float(r.mean())


def _role(apples: int, cleans: int) -> str:
    if apples > SPECIALIZATION_RATIO * cleans and apples > 0:
        return "picker"
    if cleans > SPECIALIZATION_RATIO * apples and cleans > 0:
        return "cleaner"
    return "unclassified"


def division_of_labor(logs) -> LaborTable:
    """Aggregate per-agent apple/clean counters across episode logs.

    The specialization index is the fraction of agents whose apples:cleans
    ratio is beyond 10:1 in either direction.
    """
    if hasattr(logs, "apples"):
        logs = [logs]
    logs = list(logs)
    if not logs:
        return LaborTable(rows=(), specialization_index=float("nan"))
    n = len(logs[0].apples)
    apples = [0] * n
    cleans = [0] * n
    for log in logs:
        for i in range(n):
            apples[i] += log.apples[i]
            cleans[i] += log.cleans[i]
    rows = tuple((i, apples[i], cleans[i], _role(apples[i], cleans[i])) for i in range(n))
    classified = sum(1 for row in rows if row[3] != "unclassified")
    return LaborTable(rows=rows, specialization_index=classified / n)
