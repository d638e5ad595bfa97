"""Command-line entry point: ``coopcache {train,sweep,plot,validate}``.

Exit status: 0 on success, 1 for usage or configuration errors, 2 when a
run fails (including an unwritable output directory).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .config import ConfigError
from .experiments import DEFAULT_GRIDS, OUTPUT_ENV, PROFILES, SWEEP_AXES, load_spec, run
from .plotting import SchemaError, plot

EXIT_USAGE = 1
EXIT_RUNTIME = 2


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("-c", "--config", help="INI config file with [env], [agent], [experiment]")
    p.add_argument("-s", "--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                   help="override a config value, e.g. env.L=22 or agent.episodes=500")
    p.add_argument("--profile", choices=sorted(PROFILES),
                   help="agent hyperparameter preset applied before file values")
    p.add_argument("-o", "--output-dir", help=f"output directory (default: ${OUTPUT_ENV} or ./results)")
    p.add_argument("--seeds", help="comma-separated seeds")
    p.add_argument("--strategies", help="comma-separated strategies")
    p.add_argument("--workers", type=int, help="parallel runs")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="coopcache", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("train", help="train every strategy for every seed (no sweep)")
    _add_common(p)

    p = sub.add_parser("sweep", help="sweep one environment parameter")
    _add_common(p)
    p.add_argument("--axis", choices=[a for a in SWEEP_AXES if a != "none"])
    p.add_argument("--values", help="comma-separated sweep values (default grid per axis)")

    p = sub.add_parser("plot", help="render CSV files as an SVG line chart")
    p.add_argument("csv", nargs="+")
    p.add_argument("-o", "--out", required=True, help="SVG output path")
    p.add_argument("-m", "--metric", default="asr_ema")
    p.add_argument("--band", action="store_true", help="shade min/max across seeds")
    p.add_argument("--title")

    p = sub.add_parser("validate", help="check a config and print the resolved values")
    _add_common(p)
    return parser


def _spec_from_args(args, sweep: bool):
    overrides = list(args.set)
    for key, attr in (("output_dir", "output_dir"), ("seeds", "seeds"),
                      ("strategies", "strategies"), ("workers", "workers")):
        value = getattr(args, attr, None)
        if value is not None:
            overrides.append(f"experiment.{key}={value}")
    if sweep:
        if args.axis:
            overrides.append(f"experiment.sweep_axis={args.axis}")
        if args.values:
            overrides.append(f"experiment.sweep_values={args.values}")
        elif args.axis:
            overrides.append("experiment.sweep_values="
                             + ",".join(str(v) for v in DEFAULT_GRIDS[args.axis]))
    else:
        overrides.append("experiment.sweep_axis=none")
    spec = load_spec(args.config, overrides, args.profile)
    if sweep and spec.sweep_axis == "none":
        raise ConfigError("sweep needs an axis (--axis or experiment.sweep_axis)")
    return spec


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "plot":
            path = plot(args.csv, args.out, args.metric, args.band, args.title)
            print(path)
            return 0
        spec = _spec_from_args(args, sweep=args.command == "sweep")
        if args.command == "validate":
            for section, obj in (("env", spec.config), ("agent", spec.agent)):
                for k, v in dataclasses.asdict(obj).items():
                    print(f"{section}.{k} = {v}")
            for k in ("strategies", "seeds", "sweep_axis", "sweep_values", "output_dir", "workers"):
                print(f"experiment.{k} = {getattr(spec, k)}")
            return 0
        written = run(spec)
        for path in written["summary"]:
            print(path)
        return 0
    except (ConfigError, SchemaError) as exc:
        print(f"coopcache: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, RuntimeError, ValueError) as exc:
        print(f"coopcache: run failed: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
