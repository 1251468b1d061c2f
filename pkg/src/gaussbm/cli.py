"""Command line front end: verify <suite> [--config ...] and friends."""

from __future__ import annotations

import argparse
import copy
import json
import sys

from .errors import ConfigError
from .harness import DEFAULT_CONFIG, SUITES, ExperimentConfig, run


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="verify",
        description="Run numerical verification suites for Gaussian "
                    "Brunn-Minkowski inequalities.")
    sub = parser.add_subparsers(dest="suite", required=True)
    for name in SUITES + ("all",):
        sp = sub.add_parser(name, help=f"run the {name} suite")
        sp.add_argument("--config", default=None,
                        help="JSON config file (defaults to the built-in "
                             "configuration)")
        sp.add_argument("--seed", type=int, default=None,
                        help="override the RNG seed")
        sp.add_argument("--samples", type=int, default=None,
                        help="override the Monte Carlo sample count")
        sp.add_argument("--out", default=None,
                        help="override the output directory")
    return parser


def _load_config(args) -> ExperimentConfig:
    if args.config is None:
        raw = copy.deepcopy(DEFAULT_CONFIG)
    else:
        try:
            with open(args.config) as fh:
                raw = json.load(fh)
        except OSError as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}")
        except json.JSONDecodeError as exc:
            raise ConfigError(
                f"config {args.config} is not valid JSON: {exc}")
        if not isinstance(raw, dict):
            raise ConfigError("config document must be a JSON object")
    raw["suite"] = args.suite
    if args.seed is not None:
        raw["seed"] = args.seed
    if args.samples is not None:
        raw["samples"] = args.samples
    if args.out is not None:
        raw["output_dir"] = args.out
    return ExperimentConfig.from_dict(raw)


def _format_record(rec) -> str:
    parts = [f"[{rec.verdict}]", rec.name]
    if rec.gap is not None:
        parts.append(f"gap={rec.gap:.6e}")
    if rec.residual is not None:
        parts.append(f"residual={rec.residual:.6e}")
    parts.append(f"tol={rec.tolerance:.3e}")
    if rec.note:
        parts.append(f"({rec.note})")
    return " ".join(parts)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        config = _load_config(args)
        report = run(config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    for rec in report.records:
        print(_format_record(rec))
    counts = report.counts()
    print(f"{counts['pass']} pass, {counts['fail']} fail, "
          f"{counts['inconclusive']} inconclusive "
          f"-> {config.output_dir}/report.json")
    return 1 if counts["fail"] else 0


if __name__ == "__main__":
    sys.exit(main())
