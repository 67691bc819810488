"""Figure-spec documents: what to draw, from which CSVs, to which file."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from pathlib import Path

import yaml

KINDS = ("simplex_heatmap", "timeseries", "labor_panels")

SIMPLEX_TOL = 1e-6


class SpecError(Exception):
    """A figure spec that cannot be rendered as written."""


@dataclass
class FigureSpec:
    kind: str
    inputs: list[Path]
    output: Path
    metric: str | None = None
    color_bounds: tuple[float, float] | None = None
    title: str | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise SpecError(f"figure kind {self.kind!r} not one of {KINDS}")
        if not self.inputs:
            raise SpecError("at least one input CSV is required")
        self.inputs = [Path(p) for p in self.inputs]
        self.output = Path(self.output)


def load_spec(path) -> FigureSpec:
    try:
        raw = yaml.safe_load(Path(path).read_text())
    except (OSError, yaml.YAMLError) as exc:
        raise SpecError(f"cannot load spec {path}: {exc}") from exc
    if not isinstance(raw, dict):
        raise SpecError(f"spec {path} is not a mapping")
    inputs = raw.get("inputs", raw.get("input"))
    if isinstance(inputs, (str, Path)):
        inputs = [inputs]
    bounds = raw.get("color_bounds")
    return FigureSpec(
        kind=raw.get("kind", ""),
        inputs=inputs or [],
        output=raw.get("output", ""),
        metric=raw.get("metric"),
        color_bounds=tuple(bounds) if bounds else None,
        title=raw.get("title"),
    )


def read_rows(path: Path, required: tuple[str, ...]) -> list[dict]:
    """Load a CSV, failing descriptively when required columns are absent."""
    try:
        with open(path, newline="") as fh:
            reader = csv.DictReader(fh)
            header = reader.fieldnames or []
            missing = [col for col in required if col not in header]
            if missing:
                raise SpecError(f"{path} is missing columns {missing}; has {header}")
            return list(reader)
    except OSError as exc:
        raise SpecError(f"cannot read {path}: {exc}") from exc


def check_simplex_rows(rows: list[dict], path: Path) -> None:
    for i, row in enumerate(rows):
        total = float(row["psi"]) + float(row["phi"]) + float(row["omega"])
        if abs(total - 1.0) > SIMPLEX_TOL:
            raise SpecError(
                f"{path} row {i}: psi+phi+omega = {total!r}, not a simplex point"
            )
