"""Concrete syntax for rules, facts, queries and preference directives.

Rule files::

    % comments run to the end of the line
    r1: Bat(x) -> CanFly(x).
    r2: Bat(x) -> exists y . LiveIn(x,y), Cave(y).
    r4: Mammal(x), not CanFly(x) -> CanNotFly(x).
    r7: Bird(x), Mammal(x) -> bottom.
    @priority 1 = r1, r2.
    @priority 2 = r4, r7.
    @weight r1 = 3.

Identifiers in argument position are variables when they look like ``x``,
``y2`` or ``z'`` (a letter u..z followed only by digits, underscores or
primes); every other identifier, integer or double-quoted string is a
constant. Database files hold ``.``-terminated ground atoms; a query reads
``? Bird(x), not Trogloxene(x)``.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import ParseError, RuleError
from .model import (
    BOTTOM,
    KEYWORDS,
    VARIABLE_RE,
    Atom,
    Constant,
    Database,
    Instance,
    PreferenceKind,
    PreferenceSpec,
    Query,
    RepairSet,
    Rule,
    RuleSet,
    Skolem,
    Variable,
    sorted_labels,
)

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r\f\v]+)
   |(?P<nl>\n)
   |(?P<comment>%[^\n]*)
   |(?P<arrow>->)
   |(?P<directive>@[A-Za-z_]+)
   |(?P<number>-?[0-9]+)
   |(?P<ident>[A-Za-z_][A-Za-z0-9_']*)
   |(?P<string>"(?:[^"\\\n]|\\.)*")
   |(?P<punct>[(),.:?=])
    """,
    re.VERBOSE,
)

_MAX_NESTING = 64


class Token(NamedTuple):
    kind: str
    value: str
    line: int
    column: int


def tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    line, line_start, pos = 1, 0, 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        column = pos - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "punct":
            tokens.append(Token(m.group(), m.group(), line, column))
        elif kind not in ("ws", "comment"):
            tokens.append(Token(kind, m.group(), line, column))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


def _split_functor(functor: str) -> tuple[str, str] | None:
    if not functor.startswith("f_"):
        return None
    body = functor[2:]
    for i in range(len(body) - 1, 0, -1):
        if body[i] == "_" and body[i + 1 : i + 2].isalpha():
            return body[:i], body[i + 1 :]
    return None


@dataclass(frozen=True)
class ProgramDocument:
    rules: RuleSet
    prioritization: tuple[tuple[str, ...], ...] | None = None
    weights: dict[str, int] | None = None
    positions: dict[str, tuple[int, int]] = field(default_factory=dict, compare=False)

    def preference(self, kind: PreferenceKind | str) -> PreferenceSpec:
        spec = PreferenceSpec(kind, self.prioritization or (), self.weights or {})
        spec.validate(self.rules.labels)
        return spec


class _Parser:
    def __init__(self, text: str):
        self.tokens = tokenize(text)
        self.i = 0

    # -- token helpers
    def peek(self, offset: int = 0) -> Token:
        return self.tokens[min(self.i + offset, len(self.tokens) - 1)]

    def next(self) -> Token:
        tok = self.peek()
        if tok.kind != "eof":
            self.i += 1
        return tok

    def at(self, kind: str, value: str | None = None, offset: int = 0) -> bool:
        tok = self.peek(offset)
        return tok.kind == kind and (value is None or tok.value == value)

    def expect(self, kind: str, what: str | None = None) -> Token:
        tok = self.peek()
        if tok.kind != kind:
            found = "end of input" if tok.kind == "eof" else repr(tok.value)
            raise ParseError(f"expected {what or repr(kind)}, found {found}", tok.line, tok.column)
        return self.next()

    def error(self, message: str, tok: Token | None = None) -> ParseError:
        tok = tok or self.peek()
        return ParseError(message, tok.line, tok.column)

    # -- terms and atoms
    def term(self, *, variables: bool, skolems: bool, depth: int = 0) -> object:
        tok = self.peek()
        if depth > _MAX_NESTING:
            raise self.error("terms nested too deeply")
        if tok.kind == "number":
            self.next()
            return Constant(str(int(tok.value)))
        if tok.kind == "string":
            self.next()
            try:
                return Constant(json.loads(tok.value))
            except ValueError:
                raise self.error("malformed string literal", tok) from None
        if tok.kind != "ident":
            raise self.error("expected a term", tok)
        self.next()
        if self.at("("):
            if not skolems:
                raise self.error("function terms (nulls) are not allowed here", tok)
            parts = _split_functor(tok.value)
            if parts is None:
                raise self.error(f"{tok.value!r} is not a skolem function name", tok)
            args = self.arguments(variables=variables, skolems=True, depth=depth + 1)
            return Skolem(parts[0], parts[1], args)
        if tok.value in KEYWORDS:
            raise self.error(f"{tok.value!r} is a reserved word", tok)
        if VARIABLE_RE.match(tok.value):
            if not variables:
                raise self.error(f"non-ground fact: {tok.value!r} is a variable", tok)
            return Variable(tok.value)
        return Constant(tok.value)

    def arguments(self, *, variables: bool, skolems: bool, depth: int = 0) -> tuple:
        self.expect("(")
        args = []
        if not self.at(")"):
            args.append(self.term(variables=variables, skolems=skolems, depth=depth))
            while self.at(","):
                self.next()
                args.append(self.term(variables=variables, skolems=skolems, depth=depth))
        self.expect(")")
        return tuple(args)

    def atom(self, *, variables: bool = True, skolems: bool = False) -> Atom:
        tok = self.expect("ident", "atom")
        if tok.value in KEYWORDS:
            raise self.error(f"{tok.value!r} is a reserved word", tok)
        args = self.arguments(variables=variables, skolems=skolems) if self.at("(") else ()
        return Atom(tok.value, args)

    def literals(self, **kw) -> tuple[list[Atom], list[Atom]]:
        pos: list[Atom] = []
        neg: list[Atom] = []
        while True:
            if self.at("ident", "not") and self.at("ident", offset=1):
                self.next()
                neg.append(self.atom(**kw))
            else:
                pos.append(self.atom(**kw))
            if not self.at(","):
                return pos, neg
            self.next()

    # -- rule files
    def rule(self, default_label: str) -> tuple[Rule, Token]:
        start = self.peek()
        label = default_label
        if self.at("ident") and self.at(":", offset=1):
            label = self.next().value
            self.next()
        pos: list[Atom] = []
        neg: list[Atom] = []
        if not self.at("arrow"):
            pos, neg = self.literals()
        if not self.at("arrow"):
            if self.at("."):
                raise self.error("expected '->'; facts belong in the database file")
            raise self.error("expected '->' or ','")
        self.next()
        exist: list[Variable] = []
        if self.at("ident", "bottom") and self.at(".", offset=1):
            self.next()
            head = [BOTTOM]
        else:
            if self.at("ident", "exists"):
                self.next()
                while True:
                    tok = self.expect("ident", "variable")
                    if not VARIABLE_RE.match(tok.value):
                        raise self.error(f"{tok.value!r} is not a variable name", tok)
                    exist.append(Variable(tok.value))
                    if not self.at(","):
                        break
                    self.next()
                self.expect(".", "'.' after existential variables")
            if self.at("ident", "not"):
                raise self.error("negated atom in rule head")
            head, head_neg = self.literals()
            if head_neg:
                raise self.error("negated atom in rule head")
        self.expect(".", "'.' at end of rule")
        try:
            return Rule(label, tuple(pos), tuple(neg), tuple(head), tuple(exist)), start
        except RuleError as exc:
            raise ParseError(str(exc), start.line, start.column) from None

    def program(self) -> ProgramDocument:
        rules: list[Rule] = []
        positions: dict[str, tuple[int, int]] = {}
        levels: dict[int, list[tuple[str, Token]]] = {}
        weights: dict[str, tuple[int, Token]] = {}
        while not self.at("eof"):
            tok = self.peek()
            if tok.kind == "directive":
                self.next()
                if tok.value == "@priority":
                    level = int(self.expect("number", "priority level").value)
                    self.expect("=")
                    while True:
                        lab = self.expect("ident", "rule label")
                        levels.setdefault(level, []).append((lab.value, lab))
                        if not self.at(","):
                            break
                        self.next()
                elif tok.value == "@weight":
                    lab = self.expect("ident", "rule label")
                    self.expect("=")
                    num = self.expect("number", "weight")
                    if int(num.value) < 1:
                        raise self.error(f"weight of {lab.value} must be >= 1", num)
                    if lab.value in weights:
                        raise self.error(f"weight of {lab.value} given twice", lab)
                    weights[lab.value] = (int(num.value), lab)
                else:
                    raise self.error(f"unknown directive {tok.value}", tok)
                if self.at("."):
                    self.next()
                continue
            rule, start = self.rule(f"r{len(rules) + 1}")
            if rule.label in positions:
                raise ParseError(f"duplicate rule label {rule.label!r}", start.line, start.column)
            positions[rule.label] = (start.line, start.column)
            rules.append(rule)

        for lab, (_, tok) in weights.items():
            if lab not in positions:
                raise self.error(f"weight for undeclared rule {lab!r}", tok)
        prioritization = None
        if levels:
            seen: set[str] = set()
            for level in sorted(levels):
                for lab, tok in levels[level]:
                    if lab not in positions:
                        raise self.error(f"priority for undeclared rule {lab!r}", tok)
                    if lab in seen:
                        raise self.error(f"rule {lab!r} appears in two priority levels", tok)
                    seen.add(lab)
            missing = [lab for lab in positions if lab not in seen]
            if missing:
                first = levels[min(levels)][0][1]
                raise self.error(
                    "priority levels are not a partition; unassigned: " + ", ".join(missing), first
                )
            prioritization = tuple(tuple(lab for lab, _ in levels[lv]) for lv in sorted(levels))
        return ProgramDocument(
            RuleSet(rules),
            prioritization,
            {lab: w for lab, (w, _) in weights.items()} if weights else None,
            positions,
        )


def parse_program(text: str) -> ProgramDocument:
    return _Parser(text).program()


def parse_database(text: str) -> Database:
    p = _Parser(text)
    facts: list[Atom] = []
    while not p.at("eof"):
        if p.at("ident", "bottom"):
            raise p.error("the reserved bottom predicate cannot be a fact")
        facts.append(p.atom(variables=False, skolems=False))
        p.expect(".", "'.' after fact")
    return Database(frozenset(facts))


def parse_query(text: str) -> Query:
    p = _Parser(text)
    p.expect("?", "'?'")
    pos: list[Atom] = []
    neg: list[Atom] = []
    if not p.at("eof") and not p.at("."):
        pos, neg = p.literals()
    if p.at("."):
        p.next()
    if not p.at("eof"):
        raise p.error("unexpected input after query")
    return Query(tuple(pos), tuple(neg))


def parse_atom(text: str) -> Atom:
    """Parse one atom; skolem terms such as ``f_r2_y(a)`` are accepted."""
    p = _Parser(text)
    atom = p.atom(variables=True, skolems=True)
    if p.at("."):
        p.next()
    if not p.at("eof"):
        raise p.error("unexpected input after atom")
    return atom


def parse_instance(text: str) -> Instance:
    """Parse ground atoms separated by ``.`` or ``,`` (skolem terms allowed)."""
    p = _Parser(text)
    atoms: list[Atom] = []
    while not p.at("eof"):
        atoms.append(p.atom(variables=False, skolems=True))
        if p.at(".") or p.at(","):
            p.next()
    return Instance(frozenset(atoms))


# ----------------------------------------------------------------- output


def serialize_program(doc: ProgramDocument) -> str:
    lines = [str(rule) for rule in doc.rules]
    for i, level in enumerate(doc.prioritization or (), start=1):
        lines.append(f"@priority {i} = {', '.join(level)}.")
    for label, w in (doc.weights or {}).items():
        lines.append(f"@weight {label} = {w}.")
    return "\n".join(lines) + "\n"


def serialize_database(db: Instance) -> str:
    return "".join(f"{atom}.\n" for atom in db.sorted())


def serialize_query(query: Query) -> str:
    return str(query)


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, ensure_ascii=False)


def repair_records(repairs: RepairSet) -> list[dict]:
    return [
        {"repair": sorted_labels(rep), "witness": [str(a) for a in wit.sorted()]}
        for rep, wit in zip(repairs.repairs, repairs.witnesses)
    ]


def repairs_to_jsonl(repairs: RepairSet) -> str:
    return "".join(dumps(rec) + "\n" for rec in repair_records(repairs))


def atoms_text(atoms: Iterable[Atom]) -> list[str]:
    return sorted(str(a) for a in atoms)
