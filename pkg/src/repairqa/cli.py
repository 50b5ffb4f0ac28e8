"""``repairqa`` command line.

Exit codes: 0 success (for ``query``: entailed), 1 query not entailed,
2 any error. Errors are printed to stderr as one JSON object.
"""

from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import dataclass
from pathlib import Path

from . import __version__
from .analysis import analyze
from .bench import generate, run_bench
from .engine import EngineConfig, Reasoner
from .errors import RepairQAError
from .model import Database, PreferenceKind, Query, sorted_labels
from .query import certain_answer
from .repair import SearchConfig, preferred_repairs
from .solver import find_solver
from .syntax import ProgramDocument, dumps, parse_database, parse_program, parse_query, repairs_to_jsonl

EXIT_OK, EXIT_NOT_ENTAILED, EXIT_ERROR = 0, 1, 2


@dataclass(frozen=True)
class RunManifest:
    """Parsed inputs and settings of one invocation."""

    program: ProgramDocument
    database: Database | None
    query: Query | None
    preference: PreferenceKind
    engine: EngineConfig
    search: SearchConfig
    strict: bool
    fmt: str


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _engine_config(args) -> EngineConfig:
    solver = None
    if args.backend == "external":
        solver = find_solver(args.solver, timeout=args.solver_timeout)
        if solver is None:
            raise _CliError("spawn", "no ASP solver found; pass --solver or install clingo")
    return EngineConfig(
        max_skolem_depth=args.max_depth,
        max_ground_atoms=args.max_atoms,
        max_neg_branch=args.max_neg_branch,
        backend=args.backend,
        solver=solver,
    )


def build_manifest(args) -> RunManifest:
    """Read and parse every input before any computation starts."""
    program = parse_program(_read(args.rules))
    database = parse_database(_read(args.data)) if getattr(args, "data", None) else None
    query = None
    if getattr(args, "query", None) is not None:
        query = parse_query(args.query)
    elif getattr(args, "query_file", None):
        query = parse_query(_read(args.query_file))
    kind = PreferenceKind.parse(getattr(args, "pref", "subset"))
    if database is not None:
        program.preference(kind)  # validates priorities and weights up front
    search = SearchConfig(max_rules=args.max_rules, jobs=args.jobs, time_budget=args.time_budget)
    return RunManifest(program, database, query, kind, _engine_config(args), search, args.strict_classes, args.format)


class _CliError(RepairQAError):
    def __init__(self, kind: str, message: str):
        super().__init__(message)
        self.kind = kind


# ---------------------------------------------------------------- commands


def cmd_analyze(m: RunManifest) -> int:
    report = analyze(m.program.rules)
    if m.fmt == "json":
        print(dumps(report.to_dict()))
        return EXIT_OK
    print(f"r_acyclic: {str(report.r_acyclic).lower()}")
    strat = report.r_stratification
    print("r_stratification: " + ("none" if strat is None else " | ".join(", ".join(b) for b in strat)))
    print(f"guarded: {str(report.guarded).lower()}")
    levels = report.to_dict()["stratified"]
    print("stratified: " + ("none" if levels is None else ", ".join(f"{k}={v}" for k, v in levels.items())))
    return EXIT_OK


def cmd_repairs(m: RunManifest, method: str = "fast") -> int:
    pref = m.program.preference(m.preference)
    reasoner = Reasoner(m.database, m.program.rules, m.engine)
    result = preferred_repairs(m.database, m.program.rules, pref, m.engine, m.search, method=method, reasoner=reasoner)
    if m.fmt == "json":
        sys.stdout.write(repairs_to_jsonl(result))
        return EXIT_OK
    for rep, wit in zip(result.repairs, result.witnesses):
        print("{" + ", ".join(sorted_labels(rep)) + "}")
        print("  model: " + str(wit))
    return EXIT_OK


def cmd_query(m: RunManifest) -> int:
    if m.query is None:
        raise _CliError("usage", "query needs --query or --query-file")
    pref = m.program.preference(m.preference)
    verdict = certain_answer(m.database, m.program.rules, pref, m.query, m.engine, m.search, strict=m.strict)
    if m.fmt == "json":
        print(dumps(verdict.to_dict()))
    else:
        print("entailed" if verdict.entailed else "not entailed")
        if verdict.countermodel is not None:
            cm = verdict.countermodel.to_dict()
            print("  repair: {" + ", ".join(cm["repair"]) + "}")
            print("  model: {" + ", ".join(cm["model"]) + "}")
        for caveat in verdict.caveats:
            print(f"  caveat: {caveat}")
    return EXIT_OK if verdict.entailed else EXIT_NOT_ENTAILED


def cmd_bench(args) -> int:
    instance = generate(args.facts, args.reliable, args.unreliable, args.seed)
    config = _engine_config(args)
    budget = None if args.baseline_budget <= 0 else args.baseline_budget
    rows = run_bench(instance, tuple(args.kinds), config, jobs=args.jobs, baseline_budget=budget)
    if args.format == "json":
        print(dumps({"instance": instance.name, "rows": [r.to_dict() for r in rows]}))
        return EXIT_OK
    print(f"instance {instance.name}: {len(instance.database)} facts, {len(instance.rules)} rules")
    print(f"{'kind':<12} {'seconds':>9} {'status':>8} {'repairs':>8} {'checks':>7}")
    for r in rows:
        print(f"{r.kind:<12} {r.seconds:>9.3f} {r.status:>8} {r.repairs:>8} {r.checks:>7}")
    return EXIT_OK


# ------------------------------------------------------------------ parser


def _common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--backend", choices=("native", "external"), default="native")
    p.add_argument("--solver", help="solver command line (default: clingo)")
    p.add_argument("--solver-timeout", type=float, default=60.0, metavar="SEC")
    p.add_argument("--max-depth", type=int, default=8, metavar="N", help="skolem nesting limit")
    p.add_argument("--max-atoms", type=int, default=1_000_000, metavar="N", help="ground atom cap")
    p.add_argument("--max-neg-branch", type=int, default=20, metavar="N")
    p.add_argument("--max-rules", type=int, default=24, metavar="N", help="subset search guard")
    p.add_argument("--time-budget", type=float, default=None, metavar="SEC")
    p.add_argument("--jobs", type=int, default=1, metavar="N", help="concurrent consistency checks")
    p.add_argument("--strict-classes", action="store_true", help="turn class caveats into errors")
    p.add_argument("--format", choices=("json", "text"), default="json")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="repairqa", description="Query answering over inconsistent rule sets.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    kinds = [k.value for k in PreferenceKind]

    p = sub.add_parser("analyze", help="reliance graph and class checks")
    p.add_argument("--rules", required=True)
    _common(p)

    p = sub.add_parser("repairs", help="list preferred repairs")
    p.add_argument("--rules", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--pref", choices=kinds, default="subset")
    p.add_argument("--method", choices=("fast", "reference"), default="fast")
    _common(p)

    p = sub.add_parser("query", help="certain answer of a Boolean query")
    p.add_argument("--rules", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--pref", choices=kinds, default="subset")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--query", help='query text, e.g. "? Bird(x), not Trogloxene(x)"')
    group.add_argument("--query-file")
    _common(p)

    p = sub.add_parser("bench", help="time repair search on a synthetic instance")
    p.add_argument("--facts", type=int, default=10_000)
    p.add_argument("--reliable", type=int, default=120)
    p.add_argument("--unreliable", type=int, default=3)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--kinds", nargs="+", choices=kinds, default=["prio-subset", "prio-card", "weight"])
    p.add_argument("--baseline-budget", type=float, default=60.0, metavar="SEC",
                   help="time budget of the plain inclusion baseline; 0 skips it")
    _common(p)
    return parser


def _fail(kind: str, message: str, **extra) -> int:
    sys.stderr.write(dumps({"error": kind, "message": message, **extra}) + "\n")
    return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.ERROR, format="%(levelname)s %(message)s")
    try:
        if args.command == "bench":
            return cmd_bench(args)
        manifest = build_manifest(args)
        if args.command == "analyze":
            return cmd_analyze(manifest)
        if args.command == "repairs":
            return cmd_repairs(manifest, args.method)
        return cmd_query(manifest)
    except RepairQAError as exc:
        extra = {}
        if hasattr(exc, "line"):
            extra = {"line": exc.line, "column": exc.column}
        return _fail(exc.kind, str(exc), **extra)
    except OSError as exc:
        return _fail("io", f"{exc.strerror or exc}: {exc.filename}" if exc.filename else str(exc))
    except ValueError as exc:
        return _fail("invalid-input", str(exc))


if __name__ == "__main__":
    sys.exit(main())
