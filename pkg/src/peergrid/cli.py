"""Command-line entry point.

    peergrid run --config scenario.json [--seed N] [--format csv|json]
                 [--out report.csv] [--sweep K]

Exit codes: 0 on a completed run (a missed deadline is a result, not a
failure), 1 on config/validation errors, 2 on I/O errors.
"""

import argparse
import sys

from .harness import (
    ConfigError,
    emit_report,
    emit_sweep_report,
    load_config,
    run_scenario,
)

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_IO = 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="peergrid",
        description="Efficient-peer selection simulator for deadline-driven P2P computing",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run a scenario and emit a report")
    run.add_argument("--config", required=True, help="path to a JSON scenario file")
    run.add_argument("--seed", type=int, default=None, help="override the scenario seed")
    run.add_argument("--format", choices=["csv", "json"], default="json")
    run.add_argument("--out", default=None, help="write the report here instead of stdout")
    run.add_argument(
        "--sweep", type=int, default=None, metavar="K",
        help="run K consecutive seeds starting from the effective seed",
    )
    run.add_argument(
        "--select-all", action="store_true",
        help="control mode: dispatch to every responder, skipping selection",
    )
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)

    try:
        config = load_config(args.config)
    except FileNotFoundError:
        print(f"error: config file not found: {args.config}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"error: cannot read config: {exc}", file=sys.stderr)
        return EXIT_IO
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    if args.sweep is not None and args.sweep < 1:
        print("error: --sweep must be a positive integer", file=sys.stderr)
        return EXIT_CONFIG

    base_seed = config.seed if args.seed is None else args.seed
    if args.sweep is None:
        summary = run_scenario(config, seed=base_seed, select_all=args.select_all)
        payload = emit_report(summary, args.format)
    else:
        summaries = [
            run_scenario(config, seed=base_seed + k, select_all=args.select_all)
            for k in range(args.sweep)
        ]
        payload = emit_sweep_report(summaries, args.format)

    if args.out is None:
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        try:
            with open(args.out, "wb") as handle:
                handle.write(payload)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return EXIT_IO
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
