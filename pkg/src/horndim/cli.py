"""Command-line entry point.  Every subcommand prints a JSON report.

Exit status: 0 safe or success, 1 unsafe (or a violated model), 2 unknown,
3 for errors including usage errors.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from pathlib import Path
from typing import Optional, Sequence

from horndim.chc import ArityError, Interpretation, Program, ProgramError, model_check
from horndim.derivations import ANY_GOAL, TraceError, enumerate_trees, parse_trace
from horndim.instrument import InstrumentationError, erase_dimensions, instrument
from horndim.smtlib import export_smtlib_horn
from horndim.solver import KINDS, PORTFOLIO, SAFE, UNKNOWN, UNSAFE, OracleConfig, OracleError
from horndim.solver import SafeResult, solve_inc, solve_partition
from horndim.specialize import PEError, atleast, atmost
from horndim.syntax import ParseError, format_fact, parse_interpretation, parse_program, print_program

SCHEMA = 1
EXIT = {SAFE: 0, UNSAFE: 1, UNKNOWN: 2}
EXIT_ERROR = 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _read_program(path: str) -> Program:
    return parse_program(Path(path).read_text(encoding="utf-8"))


def _with_property(p: Program, path: Optional[str]) -> Program:
    if path is None:
        return p
    return instrument(p, _read_program(path))


def _facts_json(i: Interpretation) -> list[str]:
    return [line for f in i for line in format_fact(f).splitlines()]


def _result_json(r: SafeResult) -> dict:
    out = {"status": r.status, "dimension_reached": r.info.get("dimension_reached")}
    if isinstance(r.witness, Interpretation):
        out["witness"] = _facts_json(r.witness)
    elif r.witness is not None:
        out["witness"] = str(r.witness)
    else:
        out["witness"] = None
    out["info"] = {k: v for k, v in r.info.items() if k != "seconds"}
    return out


def _config(args) -> OracleConfig:
    return OracleConfig(kind=args.oracle, timeout=args.timeout, budget=args.budget)


# -- subcommands -----------------------------------------------------------------

def cmd_parse(args, report):
    p = _read_program(args.file)
    report["program"] = print_program(p)
    report["predicates"] = p.predicates
    return 0


def cmd_dim(args, report):
    t = parse_trace(args.term)
    report["dimension"] = t.dim
    report["nodes"] = t.size
    return 0


def cmd_instrument(args, report):
    report["program"] = print_program(_with_property(_read_program(args.file), args.property))
    return 0


def _specialize(args, report, fn):
    if args.dimension is None:
        raise UsageError("-k/--dimension is required")
    spec = fn(_read_program(args.file), args.dimension)
    prog = erase_dimensions(spec.program) if args.strip_dim else spec.program
    report["program"] = print_program(prog)
    report["provenance"] = dict(sorted(spec.provenance.items()))
    if args.out:
        stem = Path(args.out).with_suffix("")
        stem.with_suffix(".chc").write_text(report["program"], encoding="utf-8")
        stem.with_suffix(".provenance.json").write_text(
            json.dumps(report["provenance"], indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return 0


def cmd_atmost(args, report):
    return _specialize(args, report, atmost)


def cmd_atleast(args, report):
    return _specialize(args, report, atleast)


def cmd_enumerate(args, report):
    p = _with_property(_read_program(args.file), args.property)
    root = ANY_GOAL if args.root is None else args.root
    trees = enumerate_trees(p, root, args.budget, feasible_only=args.feasible,
                            dim_exact=args.dimension)
    report["trees"] = [{"trace": str(t), "dimension": t.dim, "nodes": t.size} for t in trees]
    return 0


def cmd_check_model(args, report):
    p = _with_property(_read_program(args.file), args.property)
    model = parse_interpretation(Path(args.model).read_text(encoding="utf-8"))
    ok, bad = model_check(p, model)
    report["model"] = ok
    report["violated"] = bad
    return 0 if ok else 1


def cmd_solve_partition(args, report):
    p = _with_property(_read_program(args.file), args.property)
    r = solve_partition(p, args.dimension or 0, _config(args))
    report["result"] = _result_json(r)
    report["timings"]["solve_ms"] = round(r.info.get("seconds", 0.0) * 1000)
    return EXIT[r.status]


def cmd_solve_inc(args, report):
    p = _with_property(_read_program(args.file), args.property)
    seed = None
    if args.seed:
        seed = parse_interpretation(Path(args.seed).read_text(encoding="utf-8"))
    r = solve_inc(p, args.dimension or 0, seed, _config(args))
    report["result"] = _result_json(r)
    report["timings"]["solve_ms"] = round(r.info.get("seconds", 0.0) * 1000)
    return EXIT[r.status]


def cmd_export_smtlib(args, report):
    p = _with_property(_read_program(args.file), args.property)
    report["smtlib"] = export_smtlib_horn(p)
    return 0


COMMANDS = {
    "parse": cmd_parse,
    "dim": cmd_dim,
    "instrument": cmd_instrument,
    "atmost": cmd_atmost,
    "atleast": cmd_atleast,
    "enumerate": cmd_enumerate,
    "check-model": cmd_check_model,
    "solve-partition": cmd_solve_partition,
    "solve-inc": cmd_solve_inc,
    "export-smtlib": cmd_export_smtlib,
}


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("-k", "--dimension", type=int, default=None)
    common.add_argument("--oracle", choices=KINDS, default=PORTFOLIO)
    common.add_argument("--timeout", type=float, default=60.0, help="seconds per oracle query")
    common.add_argument("--budget", type=int, default=8, help="node budget for unfolding")
    common.add_argument("--strip-dim", action="store_true",
                        help="project dimension arguments out of specialized programs")
    common.add_argument("--property", help="clauses appended after instrumentation")
    common.add_argument("--out", help="write the JSON report here instead of stdout")

    parser = _Parser(prog="horndim", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", parser_class=_Parser)
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "dim":
            sp.add_argument("term", help="trace tree, e.g. c3(c2(c1,c1))")
            continue
        sp.add_argument("file")
        if name == "check-model":
            sp.add_argument("model", help="constrained facts, one per line")
        elif name == "solve-inc":
            sp.add_argument("--seed", help="approximate solution to start from")
        elif name == "enumerate":
            sp.add_argument("--root", help="predicate at the root (default: goal clauses)")
            sp.add_argument("--feasible", action="store_true")
    return parser


def _check_args(args) -> None:
    if args.dimension is not None and args.dimension < 0:
        raise UsageError("-k/--dimension must be non-negative")
    if args.timeout <= 0 or args.budget < 1:
        raise UsageError("--timeout must be positive and --budget at least 1")


def run(argv: Optional[Sequence[str]] = None) -> tuple[int, dict]:
    """Run one subcommand; returns the exit status and the report."""
    code, report, _ = _run(argv)
    return code, report


def _run(argv) -> tuple[int, dict, Optional[str]]:
    start = time.monotonic()
    report: dict = {"schema": SCHEMA}
    out = None
    try:
        args = build_parser().parse_args(argv)
        out = getattr(args, "out", None)
        if args.command is None:
            raise UsageError(f"expected a subcommand: {', '.join(COMMANDS)}")
        _check_args(args)
        report.update(subcommand=args.command, input=getattr(args, "file", None) or args.term,
                      parameters={"k": args.dimension, "oracle": args.oracle,
                                  "timeout": args.timeout, "budget": args.budget},
                      timings={})
        code = COMMANDS[args.command](args, report)
    except UsageError as e:
        report["error"] = f"usage: {e}"
        return EXIT_ERROR, report, out
    except (OSError, ParseError, ArityError, ProgramError, TraceError, InstrumentationError,
            PEError, OracleError, KeyError, ValueError) as e:
        report["error"] = f"{type(e).__name__}: {e}"
        return EXIT_ERROR, report, out
    report["timings"]["total_ms"] = round((time.monotonic() - start) * 1000)
    report["exit"] = code
    return code, report, out


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, report, out = _run(argv)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    if "error" in report:
        print(f"horndim: {report['error']}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
