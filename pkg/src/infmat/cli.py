"""Command-line entry point: ``infmat run | selftest | demo``."""

from __future__ import annotations

import argparse
import sys

from . import __version__


def cmd_run(args) -> int:
    from .scenario import run_scenario

    code, _, message = run_scenario(args.scenario, args.out)
    print(message, file=sys.stderr if code == 1 else sys.stdout)
    return code


def selftest_lines(seed: int) -> tuple[list[str], bool]:
    from .acceptance import run_suite

    results = run_suite(seed)
    passed = sum(r.passed for r in results)
    lines = [f"infmat {__version__} selftest seed={seed}"]
    lines += [r.line() for r in results]
    lines.append(f"{passed}/{len(results)} suites passed")
    return lines, passed == len(results)


def cmd_selftest(args) -> int:
    lines, ok = selftest_lines(args.seed)
    print("\n".join(lines))
    return 0 if ok else 1


def cmd_demo(args) -> int:
    from .demos import DEMOS

    if args.name not in DEMOS:
        print(f"unknown demo {args.name!r}; valid names: {', '.join(DEMOS)}", file=sys.stderr)
        return 1
    print("\n".join(DEMOS[args.name]()))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="infmat",
                                     description="Derivations of infinite matrix rings.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="decompose the derivation described by a JSON scenario")
    p.add_argument("scenario")
    p.add_argument("--out", help="report path (default: <scenario>.report.json)")
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("selftest", help="run the seeded acceptance suites")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_selftest)

    p = sub.add_parser("demo", help="print a walkthrough of the pipeline")
    p.add_argument("name")
    p.set_defaults(func=cmd_demo)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except KeyboardInterrupt:
        return 130


if __name__ == "__main__":
    sys.exit(main())
