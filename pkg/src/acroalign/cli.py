"""Command-line interface: build, align, extract, inspect.

Exit codes: 0 success, 1 domain-level negative result (no alignment),
2 usage, I/O or parse errors.  Diagnostics go to stderr, data to stdout.
"""

from __future__ import annotations

import argparse
import sys

from .builder import build_bundle, load_cost_table
from .machine import MachineFormatError, deserialize, serialize
from .pipeline import align, extract_corpus, format_record_tsv
from .semiring import format_weight

DEFAULT_MACHINE = "./acro3.nwfsm"


def _load_machine(path):
    try:
        with open(path, "r", encoding="utf-8") as fh:
            return deserialize(fh.read())
    except OSError as exc:
        raise SystemExit2(f"cannot read machine file {path}: {exc}")
    except MachineFormatError as exc:
        raise SystemExit2(f"bad machine file {path}: {exc}")


class SystemExit2(Exception):
    """Usage / IO / parse failure; message printed to stderr, exit status 2."""


def cmd_build(args) -> int:
    costs = None
    if args.costs:
        try:
            costs = load_cost_table(args.costs)
        except (OSError, ValueError) as exc:
            raise SystemExit2(f"bad cost table: {exc}")
    bundle = build_bundle(costs)
    m = bundle.extractor
    try:
        with open(args.machine, "w", encoding="utf-8") as fh:
            fh.write(serialize(m))
    except OSError as exc:
        raise SystemExit2(f"cannot write {args.machine}: {exc}")
    print(f"wrote {args.machine}: arity {m.arity}, "
          f"{m.num_states} states, {len(m.transitions)} transitions")
    return 0


def cmd_align(args) -> int:
    machine = _load_machine(args.machine)
    try:
        record = align(args.chunk, args.acronym, machine, n_best=args.n_best)
    except ValueError as exc:
        raise SystemExit2(str(exc))
    if record is None:
        print("no alignment", file=sys.stderr)
        return 1
    for a in record.analyses:
        print(f"{a.definition}\t{a.ops}\t{format_weight(a.cost)}")
    return 0


def cmd_extract(args) -> int:
    machine = _load_machine(args.machine)
    if args.input == "-":
        lines = sys.stdin.buffer
    else:
        try:
            lines = open(args.input, "rb")
        except OSError as exc:
            raise SystemExit2(f"cannot read {args.input}: {exc}")
    out = sys.stdout
    close_out = False
    if args.output != "-":
        try:
            out = open(args.output, "w", encoding="utf-8")
            close_out = True
        except OSError as exc:
            raise SystemExit2(f"cannot write {args.output}: {exc}")
    try:
        for record in extract_corpus(lines, machine, n_best=args.n_best):
            print(format_record_tsv(record), file=out)
    finally:
        if lines is not sys.stdin.buffer:
            lines.close()
        if close_out:
            out.close()
    return 0


def cmd_inspect(args) -> int:
    m = _load_machine(args.machine)
    print(f"arity {m.arity}")
    print(f"states {m.num_states}")
    print(f"transitions {len(m.transitions)}")
    print(f"alphabet {''.join(sorted(m.symbols()))}")
    return 0


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="acroalign",
        description="Align acronyms with the text chunks that define them.")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_machine(p):
        p.add_argument("--machine", default=DEFAULT_MACHINE,
                       help=f"machine file (default {DEFAULT_MACHINE})")

    p = sub.add_parser("build", help="build the extractor and write it to a file")
    add_machine(p)
    p.add_argument("--costs", help="cost table file overriding the defaults")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("align", help="align one normalized chunk/acronym pair")
    add_machine(p)
    p.add_argument("chunk")
    p.add_argument("acronym")
    p.add_argument("--n-best", type=int, default=1, dest="n_best")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("extract", help="run the pipeline over a sentence-per-line file")
    add_machine(p)
    p.add_argument("--input", default="-", help="input file, - for stdin")
    p.add_argument("--output", default="-", help="output file, - for stdout")
    p.add_argument("--n-best", type=int, default=1, dest="n_best")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("inspect", help="print size and alphabet of a machine file")
    add_machine(p)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if getattr(args, "n_best", 1) < 1:
        print("--n-best must be at least 1", file=sys.stderr)
        return 2
    try:
        return args.func(args)
    except SystemExit2 as exc:
        print(str(exc), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
