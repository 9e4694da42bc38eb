"""Command-line entry: run scenario configs, validate them, render figures.

Exit codes: 0 success, 2 configuration error, 3 numerical failure,
4 I/O failure.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .config import ConfigError, load_config, validate_config

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwoptics",
        description="deterministic few-mode matter-wave optics simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="execute a scenario config and write CSV + manifest")
    run.add_argument("config", type=Path)
    run.add_argument("--out", type=Path, default=None, help="output directory")
    run.add_argument("--workers", type=int, default=1, help="parallel sweep workers")
    run.add_argument("--seed", type=int, default=None,
                     help="reserved; no stochastic paths exist in this version")

    val = sub.add_parser("validate", help="check a config without running it")
    val.add_argument("config", type=Path)

    plot = sub.add_parser("plot", help="render a figure from a run manifest")
    plot.add_argument("manifest", type=Path)
    plot.add_argument("figure", help="figure id: fig1 or fig2")
    plot.add_argument("--out", type=Path, default=None, help="output file")
    return parser


def _cmd_run(args) -> int:
    from .runner import run_config

    cfg = load_config(args.config)
    validate_config(cfg)
    if args.out is not None:
        out_dir = args.out
    elif cfg.out is not None:
        out_dir = args.config.parent / cfg.out
    else:
        out_dir = args.config.parent / "out"
    manifest = run_config(cfg, out_dir, workers=max(1, args.workers))
    print(manifest.path)
    return EXIT_OK


def _cmd_validate(args) -> int:
    cfg = load_config(args.config)
    keys = validate_config(cfg)
    print(f"ok: {cfg.kind} scenario '{cfg.name}', {len(keys)} run(s)")
    return EXIT_OK


def _cmd_plot(args) -> int:
    from .plotting import make_plot

    path = make_plot(args.manifest, args.figure, out_path=args.out)
    print(path)
    return EXIT_OK


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    handlers = {"run": _cmd_run, "validate": _cmd_validate, "plot": _cmd_plot}
    try:
        return handlers[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (ValueError, RuntimeError, ArithmeticError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
