"""Command line entry point: ``photonic-selflearn <subcommand> [options]``.

Exit status is 0 when the run met its goal, 2 when it finished but was
flagged (e.g. the cost never reached ``success_cf``) and 1 on errors.
"""
from __future__ import annotations

import argparse
import logging
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

from .experiments import EXIT_ERROR, EXIT_FLAGGED, EXIT_OK, ConfigError, ExperimentConfig, run

SUBCOMMANDS = {
    "switch": "switch",
    "mimo": "mimo",
    "mimo-eye": "mimo-eye",
    "filter": "filter",
    "sweep": "spectrum-sweep",
    "eye-sim": "eye-sim",
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="photonic-selflearn", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in SUBCOMMANDS:
        p = sub.add_parser(name)
        p.add_argument("--config", type=Path, help="flat YAML config file")
        p.add_argument("--seed", type=int, help="global seed (overrides the config)")
        p.add_argument("--out", help="output directory (overrides the config)")
        p.add_argument("--acceptance-rule", choices=("paper", "greedy"))
        p.add_argument("--state", help="saved voltage snapshot (sweep, eye-sim, mimo-eye warm start)")
        p.add_argument("--seeds", help="comma separated seeds to run as independent sessions")
        p.add_argument("-v", "--verbose", action="store_true")
    return parser


def make_config(args) -> ExperimentConfig:
    experiment = SUBCOMMANDS[args.command]
    overrides = {
        "seed": args.seed,
        "out_dir": args.out,
        "acceptance_rule": args.acceptance_rule,
        "state_file": args.state,
    }
    overrides = {k: v for k, v in overrides.items() if v is not None}
    if args.config is not None:
        return ExperimentConfig.from_file(args.config, experiment=experiment, **overrides)
    return ExperimentConfig.for_experiment(experiment, **overrides)


def _run_one(cfg: ExperimentConfig) -> int:
    return run(cfg).exit_code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        cfg = make_config(args)
        if args.seeds:
            seeds = [int(s) for s in args.seeds.split(",")]
            configs = [
                ExperimentConfig(**{**cfg.__dict__, "seed": s, "out_dir": str(Path(cfg.out_dir) / f"seed_{s}")})
                for s in seeds
            ]
            with ProcessPoolExecutor() as pool:
                codes = list(pool.map(_run_one, configs))
            for s, c in zip(seeds, codes):
                print(f"seed {s}: exit {c}")
            return EXIT_FLAGGED if any(c == EXIT_FLAGGED for c in codes) else EXIT_OK
        result = run(cfg)
    except (ConfigError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    print(Path(cfg.out_dir) / "summary.txt")
    for key, value in result.summary.items():
        print(f"  {key}: {value}")
    return result.exit_code


if __name__ == "__main__":
    sys.exit(main())
