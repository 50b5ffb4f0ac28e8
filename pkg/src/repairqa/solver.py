"""Optional external ASP backend.

The database and the skolemized rules are written as a plain ASP program,
piped to a solver executable on stdin, and the answer sets it prints are read
back into :class:`Instance` values.

Emitted format::

    bat(a).
    liveIn(X, f_r2_y(X)) :- bat(X).
    canNotFly(X) :- mammal(X), not canFly(X).
    :- bird(X), mammal(X).

Predicates and identifier constants get a lower-case first letter, variables
an upper-case one; constants that are not identifiers become canonical
integers or ASP strings. Every emitted name is recorded in a
:class:`MangleTable`; two source names that would print the same raise
:class:`IdentifierCollision` rather than silently merging.
"""

from __future__ import annotations

import importlib.util
import os
import re
import shlex
import shutil
import subprocess
import sys
from dataclasses import dataclass
from typing import Iterable

from .engine import NormalRule, _sort_models, skolemize
from .errors import IdentifierCollision, SolverOutputError, SolverSpawnError, SolverTimeout
from .model import Atom, Constant, Instance, Rule, Skolem, Variable

ASP_IDENT_RE = re.compile(r"_*[a-z][A-Za-z0-9_']*\Z")
SOLVER_ENV = "REPAIRQA_SOLVER"


@dataclass(frozen=True)
class SolverConfig:
    executable: str
    args: tuple[str, ...] = ()
    model_limit: int = 0
    timeout: float = 60.0

    def __post_init__(self) -> None:
        if not self.timeout > 0:
            raise ValueError("solver timeout must be positive")
        if self.model_limit < 0:
            raise ValueError("model limit must be >= 0")
        object.__setattr__(self, "args", tuple(self.args))

    @property
    def command(self) -> list[str]:
        return [self.executable, *self.args]


def find_solver(executable: str | None = None, timeout: float = 60.0) -> SolverConfig | None:
    """Locate an ASP solver.

    Looks at ``executable``, then the REPAIRQA_SOLVER environment variable
    (a command line), then ``clingo`` on PATH, then the clingo Python module.
    """
    spec = executable or os.environ.get(SOLVER_ENV)
    if spec:
        parts = shlex.split(spec)
        return SolverConfig(parts[0], tuple(parts[1:]), timeout=timeout)
    found = shutil.which("clingo")
    if found:
        return SolverConfig(found, timeout=timeout)
    if importlib.util.find_spec("clingo") is not None:
        return SolverConfig(sys.executable, ("-m", "clingo"), timeout=timeout)
    return None


# ------------------------------------------------------------------ naming


def _lower_first(name: str) -> str:
    for i, ch in enumerate(name):
        if ch != "_":
            return name[:i] + ch.lower() + name[i + 1 :]
    return name


def _asp_string(text: str) -> str:
    return '"' + text.replace("\\", "\\\\").replace('"', '\\"').replace("\n", "\\n") + '"'


class MangleTable:
    """Two-way map between source names and emitted ASP names."""

    def __init__(self) -> None:
        self.predicates: dict[tuple[str, int], tuple[str, int]] = {}
        self._pred_back: dict[tuple[str, int], tuple[str, int]] = {}
        # (emitted text, arity) -> source term kind
        self._terms_back: dict[tuple[str, int], tuple] = {}
        self._terms: dict[tuple, str] = {}

    def _claim(self, back: dict, target, source) -> None:
        owner = back.setdefault(target, source)
        if owner != source:
            raise IdentifierCollision(f"{owner!r} and {source!r} both map to {target[0]!r}")

    def predicate(self, name: str, arity: int) -> str:
        key = (name, arity)
        if key not in self.predicates:
            target = _lower_first(name)
            if not ASP_IDENT_RE.match(target) or target == "not":
                target = "p_" + target
            self._claim(self._pred_back, (target, arity), key)
            self.predicates[key] = (target, arity)
        return self.predicates[key][0]

    def _name(self, source: tuple, arity: int, preferred: str) -> str:
        if source not in self._terms:
            self._claim(self._terms_back, (preferred, arity), source)
            self._terms[source] = preferred
        return self._terms[source]

    def constant(self, name: str) -> str:
        if re.fullmatch(r"-?(0|[1-9][0-9]*)", name) and name != "-0":
            return name
        target = _lower_first(name)
        if ASP_IDENT_RE.match(target) and target != "not":
            return self._name(("const", name), 0, target)
        return _asp_string(name)

    def term(self, t) -> str:
        if isinstance(t, Constant):
            return self.constant(t.name)
        if isinstance(t, Variable):
            return t.name[0].upper() + t.name[1:]
        if isinstance(t, Skolem):
            functor = self._name(("skolem", t.rule, t.var), len(t.args), _lower_first(t.functor))
            if not t.args:
                return functor
            return f"{functor}({', '.join(self.term(a) for a in t.args)})"
        raise TypeError(f"unexpected term {t!r}")

    def atom(self, a: Atom) -> str:
        name = self.predicate(a.predicate, a.arity)
        if not a.args:
            return name
        return f"{name}({', '.join(self.term(t) for t in a.args)})"

    # -- reverse direction
    def source_predicate(self, name: str, arity: int) -> str:
        try:
            return self._pred_back[(name, arity)][0]
        except KeyError:
            raise SolverOutputError(f"solver reported unknown predicate {name}/{arity}") from None

    def source_term(self, name: str, args: tuple):
        source = self._terms_back.get((name, len(args)))
        if source is None:
            raise SolverOutputError(f"solver reported unknown term {name}/{len(args)}")
        if source[0] == "const":
            return Constant(source[1])
        return Skolem(source[1], source[2], args)


@dataclass(frozen=True)
class AspProgram:
    text: str
    table: MangleTable


def emit_asp(database: Iterable[Atom], rules: Iterable[NormalRule | Rule], table: MangleTable | None = None) -> AspProgram:
    """ASP text for ``database`` plus ``rules`` (skolemized first when needed)."""
    table = table or MangleTable()
    rules = list(rules)
    if any(isinstance(r, Rule) for r in rules):
        rules = list(skolemize(r for r in rules))
    lines = [f"{table.atom(a)}." for a in sorted(database, key=str)]
    for rule in rules:
        body = [table.atom(a) for a in rule.body_pos] + [f"not {table.atom(a)}" for a in rule.body_neg]
        body_text = ", ".join(body) if body else "#true"
        for head in rule.head:
            if head.is_bottom:
                lines.append(f":- {body_text}.")
            elif body:
                lines.append(f"{table.atom(head)} :- {body_text}.")
            else:
                lines.append(f"{table.atom(head)}.")
    return AspProgram("\n".join(lines) + "\n", table)


# ------------------------------------------------------------- answer sets

_OUT_TOKEN_RE = re.compile(r'\s*(?:(?P<num>-?[0-9]+)|(?P<ident>_*[a-z][A-Za-z0-9_\']*)|(?P<str>"(?:[^"\\]|\\.)*")|(?P<punct>[(),]))')


class _AnswerParser:
    def __init__(self, line: str, table: MangleTable):
        self.tokens = []
        pos = 0
        line = line.rstrip()
        while pos < len(line):
            m = _OUT_TOKEN_RE.match(line, pos)
            if m is None or m.end() == pos:
                raise SolverOutputError(f"cannot parse solver output near {line[pos:pos + 30]!r}")
            self.tokens.append((m.lastgroup, m.group(m.lastgroup)))
            pos = m.end()
            while pos < len(line) and line[pos].isspace():
                pos += 1
        self.i = 0
        self.table = table

    def peek(self) -> tuple[str, str] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, value: str | None = None) -> tuple[str, str]:
        tok = self.peek()
        if tok is None or (value is not None and tok[1] != value):
            raise SolverOutputError(f"malformed answer set: expected {value or 'a term'}")
        self.i += 1
        return tok

    def args(self) -> tuple:
        if self.peek() != ("punct", "("):
            return ()
        self.take("(")
        out = [self.term()]
        while self.peek() == ("punct", ","):
            self.take(",")
            out.append(self.term())
        self.take(")")
        return tuple(out)

    def term(self):
        kind, value = self.take()
        if kind == "num":
            return Constant(value)
        if kind == "str":
            return Constant(re.sub(r"\\(.)", lambda m: "\n" if m.group(1) == "n" else m.group(1), value[1:-1]))
        if kind != "ident":
            raise SolverOutputError(f"malformed answer set near {value!r}")
        return self.table.source_term(value, self.args())

    def atoms(self) -> list[Atom]:
        out = []
        while self.peek() is not None:
            kind, name = self.take()
            if kind != "ident":
                raise SolverOutputError(f"malformed answer set near {name!r}")
            args = self.args()
            out.append(Atom(self.table.source_predicate(name, len(args)), args))
        return out


def parse_answer_sets(output: str, table: MangleTable) -> list[Instance]:
    lines = output.splitlines()
    models: list[Instance] = []
    status = None
    i = 0
    while i < len(lines):
        line = lines[i].strip()
        if line.startswith("Answer:"):
            atoms_line = lines[i + 1] if i + 1 < len(lines) else ""
            models.append(Instance(frozenset(_AnswerParser(atoms_line, table).atoms())))
            i += 2
            continue
        if line in ("SATISFIABLE", "UNSATISFIABLE", "UNKNOWN", "OPTIMUM FOUND"):
            status = line
        i += 1
    if status is None:
        raise SolverOutputError("unrecognized solver output (no result line)")
    if status == "UNKNOWN":
        raise SolverTimeout("solver stopped without a definite answer")
    if status == "UNSATISFIABLE" and models:
        raise SolverOutputError("solver reported UNSATISFIABLE after printing models")
    return models


def solve_external(program: AspProgram, config: SolverConfig, limit: int | None = None) -> list[Instance]:
    """Run the solver on ``program``; an empty list means no stable model."""
    n = limit or config.model_limit
    cmd = [*config.command, f"--models={n}"]
    try:
        proc = subprocess.run(
            cmd, input=program.text, capture_output=True, text=True, timeout=config.timeout
        )
    except subprocess.TimeoutExpired:
        raise SolverTimeout(f"solver exceeded {config.timeout} s") from None
    except OSError as exc:
        raise SolverSpawnError(f"cannot run {config.executable}: {exc}") from None
    try:
        return parse_answer_sets(proc.stdout, program.table)
    except SolverOutputError as exc:
        tail = proc.stderr.strip().splitlines()[-3:]
        if tail:
            raise SolverOutputError(f"{exc}; solver said: {' | '.join(tail)}") from None
        raise


def external_stable_models(
    database: Iterable[Atom], rules: Iterable[Rule], config: SolverConfig | None, limit: int = 0
) -> list[Instance]:
    config = config or find_solver()
    if config is None:
        raise SolverSpawnError("no ASP solver found; install clingo or set " + SOLVER_ENV)
    program = emit_asp(database, list(rules))
    models = solve_external(program, config, limit)
    return _sort_models(m for m in models if not any(a.is_bottom for a in m))
