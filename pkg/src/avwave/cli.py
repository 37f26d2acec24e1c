"""Command-line front end.

Subcommands map onto experiment kinds; ``experiment`` runs a named preset
or a config file whose ``[experiment] kind`` selects the run.  All output
files are computed in memory first and written only if the whole run
succeeds.

Exit codes: 0 success, 2 configuration error, 3 numerical error.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from dataclasses import replace
from pathlib import Path

from .config import PRESETS, ExperimentConfig, load_config, preset
from .errors import AvwaveError, ConfigError
from .experiments import run_experiment

EXIT_OK, EXIT_CONFIG, EXIT_NUMERIC = 0, 2, 3

SUBCOMMANDS = ("freq-response", "dfa", "platoon", "wave", "simulate", "sweep")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI configuration file")
    common.add_argument("--out", type=Path, default=Path("."), help="output directory")
    common.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    common.add_argument("--seed", type=int, default=None, help="reserved; all paths are deterministic")

    parser = argparse.ArgumentParser(
        prog="avwave", description="Traffic wave analysis for automated-vehicle platoons.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        sub.add_parser(name, parents=[common], help=f"run a {name} computation")
    exp = sub.add_parser("experiment", parents=[common], help="run a preset or config experiment")
    exp.add_argument("preset", nargs="?", choices=sorted(PRESETS), help="built-in preset")
    exp.add_argument("--omega", type=float, default=None,
                     help="override the input angular frequency (rad/s)")
    return parser


def _load(args) -> ExperimentConfig:
    if args.command == "experiment":
        if args.preset and args.config:
            raise ConfigError("give either a preset or --config, not both")
        if args.preset:
            cfg = preset(args.preset)
        elif args.config:
            cfg = _read(args.config)
        else:
            raise ConfigError("experiment needs a preset name or --config")
        if args.omega is not None:
            if args.omega <= 0 or len(cfg.omegas) != 1:
                raise ConfigError("--omega needs a positive value and a single-component input")
            cfg = replace(cfg, omegas=(args.omega,))
        return cfg
    cfg = _read(args.config) if args.config else ExperimentConfig()
    return replace(cfg, kind=args.command)


def _read(path: Path) -> ExperimentConfig:
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    return load_config(text, source=str(path))


def write_outputs(files: dict[str, str], out: Path) -> None:
    out.mkdir(parents=True, exist_ok=True)
    staged = []
    try:
        for name, text in files.items():
            fd, tmp = tempfile.mkstemp(dir=out, prefix=f".{name}.", suffix=".tmp")
            with os.fdopen(fd, "w", newline="") as fh:
                fh.write(text)
            staged.append((tmp, out / name))
    except BaseException:
        for tmp, _ in staged:
            os.unlink(tmp)
        raise
    for tmp, dest in staged:
        os.replace(tmp, dest)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.workers < 1:
            raise ConfigError("--workers must be >= 1")
        cfg = _load(args)
        files = run_experiment(cfg, workers=args.workers)
        write_outputs(files, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except AvwaveError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except OSError as exc:
        print(f"cannot write output: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    for name in sorted(files):
        print(args.out / name)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
