"""Command-line front end: ``qheat run <file>`` and ``qheat list``."""
from __future__ import annotations

import argparse
import sys
from pathlib import Path

from . import scenario
from .errors import PhysicsError, UsageError

EXIT_OK, EXIT_PHYSICS, EXIT_USAGE = 0, 1, 2


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qheat", description="Multilevel and Dicke quantum heat machine simulator.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run a scenario file or a bundled scenario by name")
    run.add_argument("file", help="path to a .scn file, or a bundled scenario name")
    run.add_argument("--out", default=".", help="output directory (default: current directory)")
    run.add_argument("--check", action="store_true", help="validate the scenario and exit")
    run.add_argument("--threads", type=int, default=1, help="worker threads for sweep grids")
    run.add_argument("--no-figures", action="store_true", help="write CSV only")

    sub.add_parser("list", help="list bundled scenarios")
    return parser


def cmd_list() -> int:
    for name in scenario.list_builtin():
        print(name)
    return EXIT_OK


def cmd_run(args) -> int:
    if args.threads < 1:
        raise UsageError("--threads must be at least 1")
    sc = scenario.load(scenario.resolve(args.file))
    if args.check:
        print(f"{sc.name}: ok ({sc.mode})")
        return EXIT_OK
    table = scenario.execute(sc, threads=args.threads)
    path = scenario.write_table(table, args.out, sc.output)
    print(path)
    if not args.no_figures:
        from .plotting import render

        png = render(table, Path(path).with_suffix(".png"))
        if png is not None:
            print(png)
    scenario.check_converged(table)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    try:
        if args.command == "list":
            return cmd_list()
        return cmd_run(args)
    except UsageError as exc:
        print(f"qheat: usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PhysicsError as exc:
        print(f"qheat: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_PHYSICS


if __name__ == "__main__":
    sys.exit(main())
