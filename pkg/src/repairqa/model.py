"""Logical vocabulary: terms, atoms, rules, databases, instances, queries, preferences.

All values are immutable. Invariants are checked at construction time, so the
rest of the package never has to re-validate a rule or a database.
"""

from __future__ import annotations

import enum
import json
import re
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping, Union

from .errors import PreferenceError, RuleError, UnboundVariableError

IDENT_RE = re.compile(r"[A-Za-z_][A-Za-z0-9_']*\Z")
# Variables follow the usual mathematical convention: u..z, optionally
# followed by digits, underscores or primes (x, y2, z', w_1).
VARIABLE_RE = re.compile(r"[u-z][0-9_']*\Z")
NUMBER_RE = re.compile(r"-?[0-9]+\Z")
KEYWORDS = frozenset({"not", "exists", "bottom"})


def label_key(label: str) -> tuple:
    """Natural sort key, so that r2 sorts before r10."""
    parts = re.split(r"(\d+)", label)
    return tuple((0, int(p), "") if p.isdigit() else (1, 0, p) for p in parts if p)


def sorted_labels(labels: Iterable[str]) -> list[str]:
    return sorted(labels, key=label_key)


def labelset_key(labels: Iterable[str]) -> tuple:
    return tuple(label_key(lab) for lab in sorted_labels(labels))


# --------------------------------------------------------------------- terms


@dataclass(frozen=True, slots=True)
class Constant:
    name: str

    def __str__(self) -> str:
        name = self.name
        if NUMBER_RE.match(name):
            return name
        if IDENT_RE.match(name) and not VARIABLE_RE.match(name) and name not in KEYWORDS:
            return name
        return json.dumps(name, ensure_ascii=False)


@dataclass(frozen=True, slots=True)
class Variable:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True, slots=True)
class Skolem:
    """Skolem term f_<rule>_<var>(args) standing for a labelled null."""

    rule: str
    var: str
    args: tuple = ()

    @property
    def functor(self) -> str:
        return f"f_{self.rule}_{self.var}"

    @property
    def depth(self) -> int:
        return 1 + max((term_depth(a) for a in self.args), default=0)

    def __str__(self) -> str:
        return f"{self.functor}({','.join(map(str, self.args))})"


Term = Union[Constant, Variable, Skolem]


def term_depth(term: Term) -> int:
    return term.depth if isinstance(term, Skolem) else 0


def term_is_ground(term: Term) -> bool:
    if isinstance(term, Variable):
        return False
    if isinstance(term, Skolem):
        return all(term_is_ground(a) for a in term.args)
    return True


def term_vars(term: Term) -> Iterator[Variable]:
    if isinstance(term, Variable):
        yield term
    elif isinstance(term, Skolem):
        for arg in term.args:
            yield from term_vars(arg)


# --------------------------------------------------------------------- atoms

BOTTOM_PREDICATE = "⊥"


@dataclass(frozen=True, slots=True)
class Atom:
    predicate: str
    args: tuple = ()

    def __post_init__(self) -> None:
        if not isinstance(self.args, tuple):
            object.__setattr__(self, "args", tuple(self.args))
        if self.predicate == BOTTOM_PREDICATE and self.args:
            raise RuleError("the falsum atom is 0-ary")

    @property
    def arity(self) -> int:
        return len(self.args)

    @property
    def signature(self) -> tuple[str, int]:
        return (self.predicate, len(self.args))

    @property
    def is_bottom(self) -> bool:
        return self.predicate == BOTTOM_PREDICATE

    def is_ground(self) -> bool:
        return all(term_is_ground(t) for t in self.args)

    def has_skolem(self) -> bool:
        return any(isinstance(t, Skolem) for t in self.args)

    def variables(self) -> Iterator[Variable]:
        for t in self.args:
            yield from term_vars(t)

    def __str__(self) -> str:
        if self.is_bottom:
            return "bottom"
        if not self.args:
            return self.predicate
        return f"{self.predicate}({','.join(map(str, self.args))})"


BOTTOM = Atom(BOTTOM_PREDICATE)


def atoms_vars(atoms: Iterable[Atom]) -> list[Variable]:
    """Variables of ``atoms`` in order of first occurrence."""
    seen: dict[Variable, None] = {}
    for atom in atoms:
        for v in atom.variables():
            seen.setdefault(v, None)
    return list(seen)


def _dedupe(items: Iterable) -> tuple:
    return tuple(dict.fromkeys(items))


# --------------------------------------------------------------------- rules


@dataclass(frozen=True)
class Rule:
    """A normal existential rule ``body_pos, not body_neg -> exists exist_vars . head``.

    A constraint has ``head == (BOTTOM,)``.
    """

    label: str
    body_pos: tuple[Atom, ...]
    body_neg: tuple[Atom, ...] = ()
    head: tuple[Atom, ...] = (BOTTOM,)
    exist_vars: tuple[Variable, ...] = ()

    def __post_init__(self) -> None:
        for name in ("body_pos", "body_neg", "head", "exist_vars"):
            object.__setattr__(self, name, _dedupe(getattr(self, name)))
        if not self.label:
            raise RuleError("rule label must be non-empty")
        if not self.head:
            raise RuleError(f"rule {self.label}: empty head")
        for atom in self.body_pos + self.body_neg + self.head:
            if any(isinstance(t, Skolem) for t in atom.args):
                raise RuleError(f"rule {self.label}: function terms are not allowed in rules")
        if any(a.is_bottom for a in self.body_pos + self.body_neg):
            raise RuleError(f"rule {self.label}: bottom may only occur as a head")
        if any(a.is_bottom for a in self.head):
            if len(self.head) != 1:
                raise RuleError(f"rule {self.label}: bottom cannot be combined with other head atoms")
            if self.exist_vars:
                raise RuleError(f"rule {self.label}: a constraint has no existential variables")
        exist = set(self.exist_vars)
        body_vars = set(atoms_vars(self.body_pos + self.body_neg))
        clash = exist & body_vars
        if clash:
            names = ", ".join(sorted(v.name for v in clash))
            raise RuleError(f"rule {self.label}: existential variable(s) {names} occur in the body")
        positive = set(atoms_vars(self.body_pos))
        unsafe = [v for v in self.univ_vars if v not in positive]
        if unsafe:
            names = ", ".join(v.name for v in unsafe)
            raise RuleError(
                f"rule {self.label}: variable(s) {names} do not occur in a positive body atom"
            )

    @property
    def univ_vars(self) -> tuple[Variable, ...]:
        exist = set(self.exist_vars)
        return tuple(
            v for v in atoms_vars(self.body_pos + self.body_neg + self.head) if v not in exist
        )

    @property
    def frontier(self) -> tuple[Variable, ...]:
        """Universal variables shared with the head (the skolem function arguments)."""
        exist = set(self.exist_vars)
        return tuple(v for v in atoms_vars(self.head) if v not in exist)

    def skolem_head(self) -> tuple[Atom, ...]:
        """Head with every existential z replaced by f_<label>_z(frontier)."""
        if not self.exist_vars:
            return self.head
        frontier = self.frontier
        sub = {z: Skolem(self.label, z.name, frontier) for z in self.exist_vars}
        return apply_substitution(self.head, sub)

    def renamed(self, suffix: str) -> "Rule":
        """Copy with the universal variables renamed by appending ``suffix``.

        Existential variables keep their names: they only name the skolem
        function, which must stay the same for both copies of a rule.
        """
        sub = {v: Variable(v.name + suffix) for v in self.univ_vars}
        return Rule(
            self.label,
            apply_substitution(self.body_pos, sub),
            apply_substitution(self.body_neg, sub),
            apply_substitution(self.head, sub),
            self.exist_vars,
        )

    @property
    def is_constraint(self) -> bool:
        return self.head == (BOTTOM,)

    @property
    def is_existential(self) -> bool:
        return bool(self.exist_vars)

    def __str__(self) -> str:
        body = [str(a) for a in self.body_pos] + [f"not {a}" for a in self.body_neg]
        head = ", ".join(map(str, self.head))
        if self.exist_vars:
            head = f"exists {', '.join(map(str, self.exist_vars))} . {head}"
        lhs = ", ".join(body)
        return f"{self.label}: {lhs} -> {head}." if lhs else f"{self.label}: -> {head}."


class RuleSet:
    """An ordered collection of rules with unique labels."""

    def __init__(self, rules: Iterable[Rule] = ()):
        self._rules: dict[str, Rule] = {}
        for rule in rules:
            if rule.label in self._rules:
                raise RuleError(f"duplicate rule label {rule.label!r}")
            self._rules[rule.label] = rule

    @property
    def labels(self) -> tuple[str, ...]:
        return tuple(self._rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self._rules.values())

    def __len__(self) -> int:
        return len(self._rules)

    def __getitem__(self, label: str) -> Rule:
        return self._rules[label]

    def __contains__(self, label: object) -> bool:
        return label in self._rules

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, RuleSet):
            return NotImplemented
        return list(self) == list(other)

    def __hash__(self) -> int:
        return hash(tuple(self))

    def __repr__(self) -> str:
        return f"RuleSet({list(self.labels)!r})"

    def subset(self, labels: Iterable[str]) -> "RuleSet":
        wanted = set(labels)
        unknown = wanted - set(self._rules)
        if unknown:
            raise RuleError(f"unknown rule labels: {', '.join(sorted_labels(unknown))}")
        return RuleSet(r for r in self if r.label in wanted)


# ----------------------------------------------------------------- instances


@dataclass(frozen=True)
class Instance:
    """A plain set of ground atoms; constants and skolem terms allowed."""

    atoms: frozenset = frozenset()

    def __post_init__(self) -> None:
        if not isinstance(self.atoms, frozenset):
            object.__setattr__(self, "atoms", frozenset(self.atoms))
        for atom in self.atoms:
            if not atom.is_ground():
                raise RuleError(f"instance atom {atom} is not ground")

    def __iter__(self) -> Iterator[Atom]:
        return iter(self.atoms)

    def __len__(self) -> int:
        return len(self.atoms)

    def __contains__(self, atom: object) -> bool:
        return atom in self.atoms

    def sorted(self) -> list[Atom]:
        return sorted(self.atoms, key=str)

    def __str__(self) -> str:
        return "{" + ", ".join(map(str, self.sorted())) + "}"


class Database(Instance):
    """A finite instance over constants only; never contains the falsum."""

    def __post_init__(self) -> None:
        super().__post_init__()
        for atom in self.atoms:
            if atom.is_bottom:
                raise RuleError("the reserved bottom predicate cannot be a database fact")
            if atom.has_skolem():
                raise RuleError(f"database fact {atom} contains a null")


# ------------------------------------------------------------------- queries


@dataclass(frozen=True)
class Query:
    """Boolean conjunctive query with negation; all variables are existential."""

    pos: tuple[Atom, ...] = ()
    neg: tuple[Atom, ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "pos", _dedupe(self.pos))
        object.__setattr__(self, "neg", _dedupe(self.neg))
        for atom in self.pos + self.neg:
            if atom.has_skolem():
                raise RuleError(f"query atom {atom} mentions a null")
            if atom.is_bottom:
                raise RuleError("bottom cannot occur in a query")

    def variables(self) -> list[Variable]:
        return atoms_vars(self.pos + self.neg)

    def __str__(self) -> str:
        lits = [str(a) for a in self.pos] + [f"not {a}" for a in self.neg]
        return "? " + ", ".join(lits) if lits else "?"


# --------------------------------------------------------------- preferences


class PreferenceKind(str, enum.Enum):
    SUBSET = "subset"
    CARDINALITY = "card"
    PRIO_SUBSET = "prio-subset"
    PRIO_CARDINALITY = "prio-card"
    WEIGHT = "weight"

    @classmethod
    def parse(cls, text: str) -> "PreferenceKind":
        aliases = {"cardinality": "card", "prio-cardinality": "prio-card", "inclusion": "subset"}
        try:
            return cls(aliases.get(text, text))
        except ValueError:
            raise PreferenceError(f"unknown preference kind {text!r}") from None

    @property
    def prioritized(self) -> bool:
        return self in (PreferenceKind.PRIO_SUBSET, PreferenceKind.PRIO_CARDINALITY)


@dataclass(frozen=True)
class PreferenceSpec:
    kind: PreferenceKind
    prioritization: tuple[tuple[str, ...], ...] = ()
    weights: Mapping[str, int] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if not isinstance(self.kind, PreferenceKind):
            object.__setattr__(self, "kind", PreferenceKind.parse(self.kind))
        object.__setattr__(self, "prioritization", tuple(tuple(level) for level in self.prioritization))
        object.__setattr__(self, "weights", dict(self.weights))
        for label, w in self.weights.items():
            if not isinstance(w, int) or isinstance(w, bool) or w < 1:
                raise PreferenceError(f"weight of {label} must be a positive integer, got {w!r}")

    def validate(self, labels: Iterable[str]) -> None:
        """Check that the parameters needed by ``kind`` cover exactly ``labels``."""
        labels = list(labels)
        universe = set(labels)
        if self.kind.prioritized:
            if not self.prioritization:
                raise PreferenceError(f"preference {self.kind.value} needs a prioritization")
            seen: set[str] = set()
            for level in self.prioritization:
                for label in level:
                    if label in seen:
                        raise PreferenceError(f"rule {label} occurs in two priority levels")
                    if label not in universe:
                        raise PreferenceError(f"priority level mentions unknown rule {label}")
                    seen.add(label)
            missing = universe - seen
            if missing:
                raise PreferenceError(
                    "prioritization is not a partition; unassigned: "
                    + ", ".join(sorted_labels(missing))
                )
        if self.kind is PreferenceKind.WEIGHT:
            missing = universe - set(self.weights)
            if missing:
                raise PreferenceError("missing weights for: " + ", ".join(sorted_labels(missing)))
            extra = set(self.weights) - universe
            if extra:
                raise PreferenceError("weights for unknown rules: " + ", ".join(sorted_labels(extra)))


@dataclass(frozen=True)
class RepairSet:
    """Preferred repairs in lexicographic order, each with one stable model."""

    preference: PreferenceSpec
    repairs: tuple[frozenset, ...]
    witnesses: tuple[Instance, ...]

    def __iter__(self) -> Iterator[frozenset]:
        return iter(self.repairs)

    def __len__(self) -> int:
        return len(self.repairs)

    def as_sets(self) -> set[frozenset]:
        return set(self.repairs)


# ------------------------------------------------------- matching/substitution

Binding = Mapping[Variable, Term]


def _match_term(pattern: Term, term: Term, binding: dict) -> bool:
    if isinstance(pattern, Variable):
        bound = binding.get(pattern)
        if bound is None:
            binding[pattern] = term
            return True
        return bound == term
    if isinstance(pattern, Skolem):
        if not isinstance(term, Skolem) or (pattern.rule, pattern.var) != (term.rule, term.var):
            return False
        if len(pattern.args) != len(term.args):
            return False
        return all(_match_term(p, t, binding) for p, t in zip(pattern.args, term.args))
    return pattern == term


def match_atom(pattern: Atom, fact: Atom, binding: Binding | None = None) -> dict | None:
    """Extend ``binding`` so that ``pattern`` maps onto the ground ``fact``.

    Returns the extended binding (a new dict) or ``None`` when no extension exists.
    """
    if pattern.predicate != fact.predicate or len(pattern.args) != len(fact.args):
        return None
    result = dict(binding or {})
    for p, t in zip(pattern.args, fact.args):
        if not _match_term(p, t, result):
            return None
    return result


def substitute_term(term: Term, binding: Binding, ground: bool = False) -> Term:
    if isinstance(term, Variable):
        value = binding.get(term)
        if value is None:
            if ground:
                raise UnboundVariableError(f"variable {term} is unbound")
            return term
        return value
    if isinstance(term, Skolem):
        return Skolem(term.rule, term.var, tuple(substitute_term(a, binding, ground) for a in term.args))
    return term


def apply_substitution(expr, binding: Binding, ground: bool = False):
    """Apply ``binding`` to an atom or to a sequence of atoms (e.g. a rule body)."""
    if isinstance(expr, Atom):
        if not expr.args:
            return expr
        return Atom(expr.predicate, tuple(substitute_term(t, binding, ground) for t in expr.args))
    return tuple(apply_substitution(a, binding, ground) for a in expr)
