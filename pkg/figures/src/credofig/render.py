"""Renderers for the three figure families.

All rendering is read-only over the input CSVs; a fixed style (sizes, dpi,
colormaps) makes byte-identical inputs produce pixel-identical images. Each
figure is written as a raster image with its plotted data table alongside
(`<name>_data.csv`).
"""

from __future__ import annotations

import csv
import math
import warnings
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import Normalize, TwoSlopeNorm
from matplotlib.patches import RegularPolygon

from .spec import FigureSpec, SpecError, check_simplex_rows, read_rows

_SQRT3 = math.sqrt(3.0)

# teammates share a hue family; families follow the team index
_TEAM_CMAPS = ("Blues", "Reds", "Greens", "Purples", "Oranges", "Greys")


@dataclass
class RenderResult:
    output: Path
    cells: int = 0
    series: int = 0
    hue_families: int = 0
    labels: tuple[str, ...] = ()


def _write_data_table(rows: list[dict], columns: list[str], output: Path) -> Path:
    table = output.with_name(output.stem + "_data.csv")
    with open(table, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, extrasaction="ignore")
        writer.writeheader()
        writer.writerows(rows)
    return table


def _float(value: str) -> float:
    return float(value) if value not in ("", None) else float("nan")


def _save(fig, output: Path) -> None:
    output.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(output, dpi=150)
    plt.close(fig)


def render_simplex(spec: FigureSpec) -> RenderResult:
    """Ternary heatmap: one hexagonal cell per credo lattice point."""
    metric = spec.metric or "incentive"
    rows = []
    for path in spec.inputs:
        rows.extend(read_rows(path, ("psi", "phi", "omega", metric)))
    if not rows:
        raise SpecError("no rows to plot")
    for path in spec.inputs:
        check_simplex_rows(rows, path)
    psi = np.array([_float(r["psi"]) for r in rows])
    phi = np.array([_float(r["phi"]) for r in rows])
    values = np.array([_float(r[metric]) for r in rows])

    # lattice step from the closest distinct psi levels
    levels = np.unique(psi)
    increment = float(np.diff(levels).min()) if len(levels) > 1 else 1.0

    if spec.color_bounds:
        lo, hi = spec.color_bounds
    else:
        lo, hi = float(np.nanmin(values)), float(np.nanmax(values))
    if lo < 0.0 < hi:
        bound = max(abs(lo), abs(hi))
        norm = TwoSlopeNorm(vmin=-bound, vcenter=0.0, vmax=bound)
        cmap = plt.get_cmap("RdBu_r")  # blue negative, white zero, red positive
    else:
        if lo == hi:
            lo, hi = lo - 1.0, hi + 1.0
        norm = Normalize(vmin=lo, vmax=hi)
        cmap = plt.get_cmap("Reds")

    fig, ax = plt.subplots(figsize=(5.2, 4.8))
    radius = increment / _SQRT3
    for p, f, v in zip(psi, phi, values):
        x = p + f / 2.0
        y = f * _SQRT3 / 2.0
        ax.add_patch(
            RegularPolygon((x, y), numVertices=6, radius=radius, orientation=0.0,
                           facecolor=cmap(norm(v)), edgecolor="none")
        )
    ax.text(1.02, -0.04, "Self", ha="left", va="top", fontsize=10)
    ax.text(0.5, _SQRT3 / 2 + 0.04, "Team", ha="center", va="bottom", fontsize=10)
    ax.text(-0.02, -0.04, "System", ha="right", va="top", fontsize=10)
    ax.set_xlim(-0.22, 1.22)
    ax.set_ylim(-0.16, _SQRT3 / 2 + 0.16)
    ax.set_aspect("equal")
    ax.axis("off")
    if spec.title:
        ax.set_title(spec.title)
    fig.colorbar(plt.cm.ScalarMappable(norm=norm, cmap=cmap), ax=ax, label=metric,
                 shrink=0.85)
    _save(fig, spec.output)
    _write_data_table(rows, list(rows[0].keys()), spec.output)
    return RenderResult(output=spec.output, cells=len(rows))


_SERIES = (
    ("coop_total", "Total", "dimgray"),
    ("coop_in_team", "In-Team", "tab:blue"),
    ("coop_out_team", "Out-Team", "tab:green"),
)


def render_timeseries(spec: FigureSpec) -> RenderResult:
    """Cooperation-rate curves per episode window; per-seed traces plus mean."""
    required = ("seed", "episode_window") + tuple(col for col, _, _ in _SERIES)
    rows = []
    for path in spec.inputs:
        rows.extend(read_rows(path, required))
    if not rows:
        raise SpecError("no rows to plot")
    seeds = sorted({r["seed"] for r in rows})
    windows = sorted({int(r["episode_window"]) for r in rows})
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for column, label, color in _SERIES:
        per_seed = []
        for seed in seeds:
            xs = [int(r["episode_window"]) for r in rows if r["seed"] == seed]
            ys = [_float(r[column]) for r in rows if r["seed"] == seed]
            order = np.argsort(xs)
            xs = np.asarray(xs)[order]
            ys = np.asarray(ys)[order]
            per_seed.append((xs, ys))
            if len(seeds) > 1:
                ax.plot(xs, ys, color=color, alpha=0.25, linewidth=0.9)
        stacked = np.full((len(seeds), len(windows)), np.nan)
        for i, (xs, ys) in enumerate(per_seed):
            idx = np.searchsorted(windows, xs)
            stacked[i, idx] = ys
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)  # all-nan window columns
            mean = np.nanmean(stacked, axis=0)
        ax.plot(windows, mean, color=color, linewidth=2.0, label=label)
    ax.set_xlabel("episode window")
    ax.set_ylabel("cooperation rate")
    ax.set_ylim(-0.02, 1.02)
    ax.legend(loc="best")
    if spec.title:
        ax.set_title(spec.title)
    _save(fig, spec.output)
    _write_data_table(rows, list(rows[0].keys()), spec.output)
    return RenderResult(output=spec.output, series=len(_SERIES) * (len(seeds) + 1)
                        if len(seeds) > 1 else len(_SERIES))


def render_labor_panels(spec: FigureSpec) -> RenderResult:
    """Cumulative apples and cleaning actions per agent, teammates in one hue."""
    required = ("episode", "agent_id", "team", "apples", "cleans")
    rows = []
    for path in spec.inputs:
        rows.extend(read_rows(path, required))
    if not rows:
        raise SpecError("no rows to plot")
    agents = sorted({int(r["agent_id"]) for r in rows})
    for expected in range(max(agents) + 1):
        if expected not in agents:
            warnings.warn(f"agent {expected} has no rows; rendered as absent",
                          stacklevel=2)
    team_of = {int(r["agent_id"]): int(r["team"]) for r in rows}
    teams = sorted(set(team_of.values()))
    rank_in_team = {}
    for team in teams:
        members = [a for a in agents if team_of[a] == team]
        for rank, agent in enumerate(members):
            rank_in_team[agent] = (rank, max(len(members) - 1, 1))

    fig, (ax_apples, ax_cleans) = plt.subplots(2, 1, figsize=(6.4, 6.0), sharex=True)
    labels = []
    for agent in agents:
        mine = sorted((r for r in rows if int(r["agent_id"]) == agent),
                      key=lambda r: int(r["episode"]))
        xs = [int(r["episode"]) for r in mine]
        apples = np.cumsum([_float(r["apples"]) for r in mine])
        cleans = np.cumsum([_float(r["cleans"]) for r in mine])
        team = team_of[agent]
        cmap = plt.get_cmap(_TEAM_CMAPS[teams.index(team) % len(_TEAM_CMAPS)])
        rank, denom = rank_in_team[agent]
        color = cmap(0.45 + 0.45 * rank / denom)
        label = f"a-{agent}/T_{team}"
        labels.append(label)
        ax_apples.plot(xs, apples, color=color, label=label, linewidth=1.8)
        ax_cleans.plot(xs, cleans, color=color, label=label, linewidth=1.8)
    ax_apples.set_ylabel("cumulative apples")
    ax_cleans.set_ylabel("cumulative cleaning actions")
    ax_cleans.set_xlabel("episode")
    ax_apples.legend(loc="upper left", fontsize=8, ncol=2)
    if spec.title:
        ax_apples.set_title(spec.title)
    _save(fig, spec.output)
    _write_data_table(rows, list(rows[0].keys()), spec.output)
    return RenderResult(output=spec.output, series=len(agents),
                        hue_families=len(teams), labels=tuple(labels))


RENDERERS = {
    "simplex_heatmap": render_simplex,
    "timeseries": render_timeseries,
    "labor_panels": render_labor_panels,
}


def render(spec: FigureSpec) -> RenderResult:
    return RENDERERS[spec.kind](spec)
