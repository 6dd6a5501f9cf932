"""``poissonlab`` command line: run, list and describe verification suites.

Exit codes: 0 all checks pass, 1 some check fails, 2 bad configuration or a
construction error inside a suite.
"""

from __future__ import annotations

import argparse
import sys

from poissonlab import liealg
from poissonlab import matgroups as mg
from poissonlab.errors import ConfigError
from poissonlab.harness.config import load_config
from poissonlab.harness.report import format_table, sort_records, write_jsonl
from poissonlab.harness.suites import SUITES, run_suite

EXIT_OK, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


def _run(args) -> int:
    try:
        cfg = load_config(args.config)
        if args.seed is not None:
            if args.seed < 0:
                raise ConfigError("--seed must be unsigned")
            cfg.seed = args.seed
        names = args.suite or (list(SUITES) if cfg.suites is None else cfg.suites)
        unknown = [n for n in names if n not in SUITES]
        if unknown:
            raise ConfigError(f"unknown suite(s): {', '.join(unknown)}")
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG

    records = []
    for name in names:
        records.extend(run_suite(cfg, name))
    records = sort_records(records)
    print(format_table(records))
    if args.json:
        if args.json == "-":
            write_jsonl(records, sys.stdout)
        else:
            with open(args.json, "w", encoding="utf-8") as fh:
                write_jsonl(records, fh)
    if any(r.error for r in records):
        return EXIT_CONFIG
    return EXIT_OK if all(r.passed for r in records) else EXIT_FAIL


STRUCTURE_KINDS = {
    "lie-poisson <algebra>": "linear structure on the dual of an algebra",
    "constant-symplectic <dim>": "canonical structure in (q, p) coordinates",
    "zero <dim>": "the zero bivector",
    "poly <dim> | i,j: <polynomial> | ...": "polynomial bivector, upper-triangle entries",
    "tangent-lift <structure>": "tangent lift fixed by the Courant identities",
}
GROUPOID_KINDS = {
    "pair <dim>": "pair groupoid R^n x R^n",
    "group <G>": "group over a point",
    "action <G> [coadjoint|linear]": "action groupoid",
    "cotangent-group <G>": "T*G over the dual of the algebra",
    "tangent-lift <groupoid>": "tangent groupoid",
    "cotangent-lift <groupoid>": "cotangent groupoid",
}


def list_catalog() -> str:
    """Algebras, groups, structure and groupoid kinds, and suites with their anchors (fixed order)."""
    lines = ["algebras:"]
    for name in sorted(liealg.CATALOG):
        g = liealg.get_algebra(name)
        lines.append(f"  {name} (dim {g.dim})")
    lines.append("groups:")
    for name in sorted(mg.GROUPS):
        G = mg.get_group(name)
        lines.append(f"  {name} (dim {G.dim}, {G.size}x{G.size} matrices, algebra {G.algebra.name})")
    lines.append("structures:")
    lines.extend(f"  {k}: {v}" for k, v in STRUCTURE_KINDS.items())
    lines.append("groupoids:")
    lines.extend(f"  {k}: {v}" for k, v in GROUPOID_KINDS.items())
    lines.append("suites:")
    width = max(len(n) for n in SUITES)
    for name, suite in SUITES.items():
        lines.append(f"  {name.ljust(width)}  [{', '.join(suite.anchors)}] {suite.summary}")
    return "\n".join(lines)


def _list(args) -> int:
    print(list_catalog())
    return EXIT_OK


def _describe(args) -> int:
    suite = SUITES.get(args.name)
    if suite is None:
        print(f"unknown suite {args.name!r}; try 'poissonlab list'", file=sys.stderr)
        return EXIT_CONFIG
    print(suite.name)
    print(f"  {suite.summary}")
    print(f"  anchors: {', '.join(suite.anchors)}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="poissonlab", description="Numerical verification lab for Poisson geometry and Lie groupoids.")
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run suites from a config file")
    run.add_argument("config", help="INI configuration file")
    run.add_argument("--seed", type=int, help="override [run] seed")
    run.add_argument("--suite", action="append", help="run only this suite (repeatable)")
    run.add_argument("--json", metavar="PATH", help="write JSON lines to PATH ('-' for stdout)")
    run.set_defaults(func=_run)

    lst = sub.add_parser("list", help="list available suites")
    lst.set_defaults(func=_list)

    desc = sub.add_parser("describe", help="describe one suite")
    desc.add_argument("name")
    desc.set_defaults(func=_describe)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
