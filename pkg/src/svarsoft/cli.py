"""Command-line front end: `svarsoft run --config <path> [...]`."""
from __future__ import annotations

import argparse
import sys

from .io import (
    EXIT_CONFIG,
    ConfigError,
    RunConfig,
    load_run_config,
    run,
    save_dataset,
    synthetic_dataset,
    write_error,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="svarsoft",
        description="Posterior sampling in sign-restricted SVARs via "
        "soft sign restrictions and slice sampling",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    runp = sub.add_parser("run", help="execute a configured run")
    runp.add_argument("--config", required=True, help="run-config YAML path")
    runp.add_argument("--seed", type=int, default=None)
    runp.add_argument("--sampler", choices=["accept-reject", "soft-sign"], default=None)
    runp.add_argument("--delta", type=float, default=None)
    runp.add_argument(
        "--mode",
        choices=["standard", "robust", "conditional-check", "bivariate-demo", "benchmark"],
        default=None,
    )
    runp.add_argument("--out", default=None, help="output directory override")

    synth = sub.add_parser("synth-data", help="write a synthetic stand-in dataset")
    synth.add_argument("--out", required=True, help="CSV output path")
    synth.add_argument("--seed", type=int, default=0)
    synth.add_argument("--periods", type=int, default=540)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "synth-data":
        save_dataset(args.out, synthetic_dataset(seed=args.seed, T=args.periods))
        return 0

    try:
        config = load_run_config(args.config)
    except (ConfigError, OSError, ValueError) as exc:
        print(f"svarsoft: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None:
        config.seed = args.seed
    if args.sampler is not None:
        config.sampler = args.sampler
    if args.delta is not None:
        config.delta = args.delta
    if args.mode is not None:
        config.mode = args.mode
    if args.out is not None:
        config.out_dir = args.out
    status = run(config)
    if status != 0:
        print(f"svarsoft: run failed with exit status {status}", file=sys.stderr)
    return status


if __name__ == "__main__":
    raise SystemExit(main())
