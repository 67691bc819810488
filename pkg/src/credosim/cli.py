"""Command-line entry points.

Subcommands: analyze-incentives, run-ipd, run-cleanup, sweep, report,
render-maps. Exit codes: 0 success, 1 run failure, 2 configuration error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

import yaml

from . import runner
from .cleanup import GridMap
from .errors import ConfigurationError, CredosimError


def _add_config_arg(sub):
    sub.add_argument("--config", required=True, help="YAML experiment config")
    sub.add_argument("--force", action="store_true", help="allow overwriting result files")
    sub.add_argument(
        "--set",
        dest="overrides",
        action="append",
        default=[],
        metavar="KEY=VALUE",
        help="override a config entry, e.g. --set env.nu=0.5 (repeatable)",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="credosim")
    subs = parser.add_subparsers(dest="command", required=True)
    for name, env in (
        ("analyze-incentives", "incentive"),
        ("run-ipd", "ipd"),
        ("run-cleanup", "cleanup"),
        ("sweep", None),
    ):
        sub = subs.add_parser(name)
        _add_config_arg(sub)
        sub.set_defaults(required_env=env)
    rep = subs.add_parser("report")
    rep.add_argument("--output-dir", required=True)
    maps = subs.add_parser("render-maps")
    maps.add_argument("--map", help="ASCII map file (defaults to the built-in map)")
    return parser


def _apply_overrides(config, overrides):
    for item in overrides:
        if "=" not in item:
            raise ConfigurationError(f"override {item!r} is not KEY=VALUE")
        key, raw = item.split("=", 1)
        value = yaml.safe_load(raw)
        parts = key.split(".")
        if parts[0] == "env":
            target = config.env
            for part in parts[1:-1]:
                target = target.setdefault(part, {})
            target[parts[-1]] = value
        elif len(parts) == 1 and hasattr(config, parts[0]):
            setattr(config, parts[0], Path(value) if parts[0] == "output_dir" else value)
        else:
            raise ConfigurationError(f"unknown override target {key!r}")
    return config


def _run_command(args) -> int:
    config = runner.load_config(args.config)
    _apply_overrides(config, args.overrides)
    if args.required_env and config.environment != args.required_env:
        raise ConfigurationError(
            f"config is for {config.environment!r}; this command needs {args.required_env!r}"
        )
    if args.required_env is None and config.credo_sweep is None:
        raise ConfigurationError("sweep requires credo_sweep in the config")
    manifests = runner.run(config, force=args.force)
    print(f"{len(manifests)} runs complete; results in {config.output_dir}")
    return 0


def _render_maps(args) -> int:
    if args.map:
        grid = GridMap.from_ascii(Path(args.map).read_text())
    else:
        grid = GridMap.default()
    chars = {"wall": "#", "river": "R", "orchard": "O", "empty": "."}
    spawn_at = {pos: str(i) for i, pos in enumerate(grid.spawn_points)}
    for y in range(grid.height):
        print(
            "".join(
                spawn_at.get((x, y), chars[grid.cell(x, y)]) for x in range(grid.width)
            )
        )
    print(
        f"# {grid.width}x{grid.height} cells, {len(grid.river_cells)} river, "
        f"{len(grid.orchard_cells)} orchard, {len(grid.spawn_points)} spawn points"
    )
    return 0


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "report":
            written = runner.report(args.output_dir)
            for env, path in sorted(written.items()):
                print(f"{env}: {path}")
            return 0
        if args.command == "render-maps":
            return _render_maps(args)
        return _run_command(args)
    except ConfigurationError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except CredosimError as exc:
        print(f"run failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
