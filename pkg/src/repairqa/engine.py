"""Skolemization, relevant grounding and stable-model computation.

Grounding only instantiates rules whose positive body lies inside the
*positive closure* of the database: the atoms reachable by forward chaining
while ignoring negative bodies. Every stable model is contained in that
closure (the reduct of a program only loses rules, so its least model is
below the closure), hence no stable model is lost.

Stable models of the ground program are found either

* strata-wise, when the predicates of the rules admit a stratification, or
* by branching over the negated atoms, with a lower/upper bound propagation
  that fixes most assumptions before any branching happens.
"""

from __future__ import annotations

import logging
import threading
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Iterable, Iterator, Sequence

from .analysis import predicate_stratify, stratify_signatures
from .errors import AtomCapExceeded, BranchLimitExceeded, DepthLimitExceeded
from .model import (
    BOTTOM,
    Atom,
    Instance,
    Rule,
    RuleSet,
    Variable,
    apply_substitution,
    match_atom,
    term_depth,
)

if TYPE_CHECKING:
    from .solver import SolverConfig

log = logging.getLogger(__name__)

BACKENDS = ("native", "external")
STRATEGIES = ("auto", "stratified", "branching")


@dataclass(frozen=True)
class EngineConfig:
    max_skolem_depth: int = 8
    max_ground_atoms: int = 1_000_000
    max_neg_branch: int = 20
    backend: str = "native"
    # "auto" uses the strata-wise fixpoint whenever the predicates stratify.
    strategy: str = "auto"
    solver: "SolverConfig | None" = None

    def __post_init__(self) -> None:
        if self.max_skolem_depth < 1 or self.max_ground_atoms < 1 or self.max_neg_branch < 0:
            raise ValueError("engine limits must be positive")
        if self.backend not in BACKENDS:
            raise ValueError(f"unknown backend {self.backend!r}")
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")


# ------------------------------------------------------------ skolemization


@dataclass(frozen=True)
class NormalRule:
    """A skolemized rule: head atoms may contain skolem terms over variables."""

    label: str
    head: tuple[Atom, ...]
    body_pos: tuple[Atom, ...]
    body_neg: tuple[Atom, ...] = ()

    def __str__(self) -> str:
        body = [str(a) for a in self.body_pos] + [f"not {a}" for a in self.body_neg]
        return f"{', '.join(map(str, self.head))} <- {', '.join(body)}".rstrip()


def skolemize(rules: Iterable[Rule]) -> tuple[NormalRule, ...]:
    return tuple(NormalRule(r.label, r.skolem_head(), r.body_pos, r.body_neg) for r in rules)


# ---------------------------------------------------------------- grounding


@dataclass(frozen=True, slots=True)
class GroundRule:
    head: Atom
    body_pos: tuple[Atom, ...] = ()
    body_neg: tuple[Atom, ...] = ()
    label: str = ""

    def __str__(self) -> str:
        body = [str(a) for a in self.body_pos] + [f"not {a}" for a in self.body_neg]
        return f"{self.head} <- {', '.join(body)}" if body else f"{self.head}."


@dataclass(frozen=True)
class GroundProgram:
    rules: tuple[GroundRule, ...]
    base_facts: Instance = field(default_factory=Instance)

    @cached_property
    def atom_universe(self) -> frozenset:
        atoms = set(self.base_facts.atoms)
        for r in self.rules:
            atoms.add(r.head)
            atoms.update(r.body_pos)
            atoms.update(r.body_neg)
        return frozenset(atoms)

    @cached_property
    def neg_atoms(self) -> frozenset:
        return frozenset(a for r in self.rules for a in r.body_neg)

    @cached_property
    def labels(self) -> frozenset:
        return frozenset(r.label for r in self.rules)

    def restrict(self, labels: Iterable[str]) -> "GroundProgram":
        keep = set(labels)
        return GroundProgram(tuple(r for r in self.rules if r.label in keep), self.base_facts)

    @cached_property
    def _core(self) -> "_Core":
        return _Core(self)


class _AtomIndex:
    """Atoms by signature and by (signature, position, term) for joins."""

    def __init__(self) -> None:
        self.by_sig: dict[tuple, list[Atom]] = {}
        self.by_arg: dict[tuple, list[Atom]] = {}

    def add(self, atom: Atom) -> None:
        sig = atom.signature
        self.by_sig.setdefault(sig, []).append(atom)
        for i, t in enumerate(atom.args):
            self.by_arg.setdefault((sig, i, t), []).append(atom)

    def candidates(self, pattern: Atom, binding: dict) -> list[Atom]:
        sig = pattern.signature
        for i, t in enumerate(pattern.args):
            if isinstance(t, Variable):
                t = binding.get(t)
                if t is None:
                    continue
            return self.by_arg.get((sig, i, t), [])
        return self.by_sig.get(sig, [])


def _join(atoms: Sequence[Atom], index: _AtomIndex, binding: dict) -> Iterator[dict]:
    if not atoms:
        yield binding
        return
    first, rest = atoms[0], atoms[1:]
    for fact in index.candidates(first, binding):
        extended = match_atom(first, fact, binding)
        if extended is not None:
            yield from _join(rest, index, extended)


def _check_depth(atom: Atom, limit: int) -> None:
    for t in atom.args:
        depth = term_depth(t)
        if depth > limit:
            raise DepthLimitExceeded(str(t), depth, limit)


def ground_relevant(
    program: Sequence[NormalRule], database: Instance, config: EngineConfig | None = None
) -> GroundProgram:
    """Instantiate ``program`` over the positive closure of ``database``."""
    config = config or EngineConfig()
    index = _AtomIndex()
    closure: set[Atom] = set()
    for fact in database:
        closure.add(fact)
        index.add(fact)
    instances: dict[GroundRule, None] = {}
    delta_index = index
    first_round = True

    while True:
        derived: list[Atom] = []

        def emit(rule: NormalRule, binding: dict) -> None:
            pos = apply_substitution(rule.body_pos, binding, ground=True)
            neg = apply_substitution(rule.body_neg, binding, ground=True)
            for h in rule.head:
                head = apply_substitution(h, binding, ground=True)
                _check_depth(head, config.max_skolem_depth)
                gr = GroundRule(head, pos, neg, rule.label)
                if gr not in instances:
                    instances[gr] = None
                    if head not in closure:
                        closure.add(head)
                        derived.append(head)
                        if len(closure) > config.max_ground_atoms:
                            raise AtomCapExceeded(
                                f"positive closure exceeds {config.max_ground_atoms} atoms"
                            )

        for rule in program:
            if not rule.body_pos:
                if first_round:
                    emit(rule, {})
                continue
            for i, pattern in enumerate(rule.body_pos):
                rest = rule.body_pos[:i] + rule.body_pos[i + 1 :]
                for fact in delta_index.by_sig.get(pattern.signature, ()):
                    binding = match_atom(pattern, fact, {})
                    if binding is None:
                        continue
                    for full in _join(rest, index, binding):
                        emit(rule, full)
        first_round = False
        if not derived:
            break
        delta_index = _AtomIndex()
        for atom in derived:
            index.add(atom)
            delta_index.add(atom)

    return GroundProgram(tuple(instances), database)


# ------------------------------------------------------- reduct, least model


def gl_reduct(program: GroundProgram | Iterable[GroundRule], model: Iterable[Atom]) -> tuple[GroundRule, ...]:
    """Drop rules whose negative body meets ``model``, then drop negative literals."""
    rules = program.rules if isinstance(program, GroundProgram) else program
    m = set(model)
    return tuple(
        GroundRule(r.head, r.body_pos, (), r.label)
        for r in rules
        if not any(a in m for a in r.body_neg)
    )


def least_model(rules: Iterable[GroundRule], base_facts: Iterable[Atom] = ()) -> Instance:
    """Least set containing ``base_facts`` and closed under the positive ``rules``."""
    rules = list(rules)
    if any(r.body_neg for r in rules):
        raise ValueError("least_model needs a negation-free program")
    watch: dict[Atom, list[int]] = {}
    missing = []
    for i, r in enumerate(rules):
        body = set(r.body_pos)
        missing.append(len(body))
        for a in body:
            watch.setdefault(a, []).append(i)
    true: set[Atom] = set()
    queue = list(base_facts) + [r.head for r, n in zip(rules, missing) if n == 0]
    while queue:
        a = queue.pop()
        if a in true:
            continue
        true.add(a)
        for i in watch.get(a, ()):
            missing[i] -= 1
            if missing[i] == 0:
                queue.append(rules[i].head)
    return Instance(frozenset(true))


# --------------------------------------------------------- native solving


class _Core:
    """Integer-coded view of a ground program used by the native solver."""

    def __init__(self, program: GroundProgram):
        self.atoms: list[Atom] = []
        self.ids: dict[Atom, int] = {}
        intern = self._intern
        self.bottom = intern(BOTTOM)
        self.facts = [intern(a) for a in program.base_facts]
        self.head: list[int] = []
        self.pos: list[tuple[int, ...]] = []
        self.neg: list[tuple[int, ...]] = []
        self.label: list[str] = []
        for r in program.rules:
            self.head.append(intern(r.head))
            self.pos.append(tuple({intern(a): None for a in r.body_pos}))
            self.neg.append(tuple({intern(a): None for a in r.body_neg}))
            self.label.append(r.label)
        self.watch: list[list[int]] = [[] for _ in self.atoms]
        for i, body in enumerate(self.pos):
            for a in body:
                self.watch[a].append(i)
        self.signature_deps = {}
        for i, r in enumerate(program.rules):
            key = (r.head.signature, frozenset(a.signature for a in r.body_pos),
                   frozenset(a.signature for a in r.body_neg))
            self.signature_deps.setdefault(key, []).append(i)

    def _intern(self, atom: Atom) -> int:
        i = self.ids.get(atom)
        if i is None:
            i = self.ids[atom] = len(self.atoms)
            self.atoms.append(atom)
        return i

    def rule_ids(self, labels: frozenset | None) -> list[int]:
        if labels is None:
            return list(range(len(self.head)))
        return [i for i, lab in enumerate(self.label) if lab in labels]

    def fixpoint(self, rules: Iterable[int]) -> bytearray:
        """Least model of the given rule indices with negative bodies ignored."""
        true = bytearray(len(self.atoms))
        missing: dict[int, int] = {}
        queue = list(self.facts)
        for r in rules:
            n = len(self.pos[r])
            if n == 0:
                queue.append(self.head[r])
            else:
                missing[r] = n
        watch, head = self.watch, self.head
        while queue:
            a = queue.pop()
            if true[a]:
                continue
            true[a] = 1
            for r in watch[a]:
                n = missing.get(r)
                if n is not None:
                    n -= 1
                    missing[r] = n
                    if n == 0:
                        queue.append(head[r])
        return true

    def reduct_rules(self, rules: Sequence[int], model: bytearray) -> list[int]:
        return [r for r in rules if not any(model[a] for a in self.neg[r])]

    def instance(self, model: bytearray) -> Instance:
        return Instance(frozenset(self.atoms[i] for i, v in enumerate(model) if v))

    def is_stable(self, rules: Sequence[int], model: bytearray) -> bool:
        return self.fixpoint(self.reduct_rules(rules, model)) == model

    # -- strata-wise evaluation
    def levels(self, rules: Sequence[int]) -> dict | None:
        wanted = set(rules)
        deps = [
            ([h], pos, neg)
            for (h, pos, neg), members in self.signature_deps.items()
            if any(m in wanted for m in members)
        ]
        return stratify_signatures(deps)

    def stratified(self, rules: Sequence[int], levels: dict) -> bytearray:
        by_level: dict[int, list[int]] = {}
        for r in rules:
            by_level.setdefault(levels.get(self.atoms[self.head[r]].signature, 0), []).append(r)
        active: list[int] = []
        model = self.fixpoint(())
        for level in sorted(by_level):
            # negative bodies refer to strictly lower levels, which are final
            active.extend(r for r in by_level[level] if not any(model[a] for a in self.neg[r]))
            model = self.fixpoint(active)
        return model

    # -- branching over negated atoms
    def branching(self, rules: Sequence[int], limit: int, max_branch: int) -> list[bytearray]:
        neg_atoms = sorted({a for r in rules for a in self.neg[r]})
        found: list[bytearray] = []

        def propagate(assign: dict[int, bool]):
            while True:
                lower = self.fixpoint(
                    r for r in rules if all(assign.get(a) is False for a in self.neg[r])
                )
                upper = self.fixpoint(
                    r for r in rules if not any(assign.get(a) is True for a in self.neg[r])
                )
                if lower[self.bottom]:
                    return None
                for a, value in assign.items():
                    if value and not upper[a]:
                        return None
                    if not value and lower[a]:
                        return None
                changed = False
                for a in neg_atoms:
                    if a in assign:
                        continue
                    if lower[a]:
                        assign[a] = True
                        changed = True
                    elif not upper[a]:
                        assign[a] = False
                        changed = True
                if not changed:
                    return lower

        def search(assign: dict[int, bool], root: bool = False) -> bool:
            lower = propagate(assign)
            if lower is None:
                return False
            open_atoms = [a for a in neg_atoms if a not in assign]
            if root and len(open_atoms) > max_branch:
                raise BranchLimitExceeded(
                    f"{len(open_atoms)} undetermined negated atoms exceed the branching "
                    f"limit of {max_branch}; use the external backend"
                )
            if not open_atoms:
                found.append(lower)
                return bool(limit) and len(found) >= limit
            a = open_atoms[0]
            for value in (True, False):
                if search({**assign, a: value}):
                    return True
            return False

        search({}, root=True)
        return found


def _sort_models(models: Iterable[Instance]) -> list[Instance]:
    return sorted(models, key=lambda m: sorted(map(str, m.atoms)))


def solve_ground(
    program: GroundProgram,
    labels: Iterable[str] | None = None,
    *,
    limit: int = 0,
    strategy: str = "auto",
    max_neg_branch: int = 20,
    levels: dict | None = None,
) -> list[Instance]:
    """Stable models of ``program`` (restricted to rules with the given labels).

    Candidates containing the falsum are discarded. ``limit`` > 0 stops after
    that many models. ``levels`` may supply a predicate stratification of the
    rules; otherwise it is computed from the ground rules when needed.
    """
    core = program._core
    rules = core.rule_ids(None if labels is None else frozenset(labels))
    if strategy != "branching":
        if levels is None:
            levels = core.levels(rules)
        if levels is None and strategy == "stratified":
            raise ValueError("program is not stratified")
    if strategy != "branching" and levels is not None:
        model = core.stratified(rules, levels)
        if model[core.bottom]:
            return []
        if core.is_stable(rules, model):
            return [core.instance(model)]
        log.warning("strata-wise candidate failed the reduct test; falling back to branching")
    models = core.branching(rules, limit, max_neg_branch)
    return _sort_models(core.instance(m) for m in models)


# ----------------------------------------------------------- entry points


class Reasoner:
    """Stable models and consistency of ``database`` with subsets of ``rules``.

    The full rule set is grounded once and every subset is solved on the
    restriction of that grounding; extra instances of dropped rules' bodies
    cannot fire, so the restriction has the same stable models. If grounding
    the full set fails, each subset is grounded on its own instead.
    """

    def __init__(self, database: Instance, rules: RuleSet, config: EngineConfig | None = None):
        self.database = database
        self.rules = rules
        self.config = config or EngineConfig()
        self._shared: GroundProgram | None = None
        self._shared_failed = False
        self._witness: dict[frozenset, Instance | None] = {}
        self._levels: dict[frozenset, dict | None] = {}
        self._lock = threading.Lock()
        self.checks = 0

    def _grounding(self, labels: frozenset) -> GroundProgram:
        if not self._shared_failed:
            with self._lock:
                if self._shared is None and not self._shared_failed:
                    try:
                        self._shared = ground_relevant(skolemize(self.rules), self.database, self.config)
                    except (DepthLimitExceeded, AtomCapExceeded) as exc:
                        log.info("full grounding failed (%s); grounding subsets separately", exc)
                        self._shared_failed = True
            if self._shared is not None:
                return self._shared
        subset = [r for r in self.rules if r.label in labels]
        return ground_relevant(skolemize(subset), self.database, self.config)

    def _strata(self, labels: frozenset) -> dict | None:
        if labels not in self._levels:
            self._levels[labels] = predicate_stratify(r for r in self.rules if r.label in labels)
        return self._levels[labels]

    def stable_models(self, labels: Iterable[str] | None = None, limit: int = 0) -> list[Instance]:
        labels = frozenset(self.rules.labels if labels is None else labels)
        self.checks += 1
        if self.config.backend == "external":
            from .solver import external_stable_models

            subset = [r for r in self.rules if r.label in labels]
            return external_stable_models(self.database, subset, self.config.solver, limit)
        program = self._grounding(labels)
        strategy = self.config.strategy
        levels = self._strata(labels) if strategy != "branching" else None
        if strategy == "stratified" and levels is None:
            raise ValueError("rule subset is not stratified")
        return solve_ground(
            program,
            labels,
            limit=limit,
            strategy=strategy if levels is not None else "branching",
            max_neg_branch=self.config.max_neg_branch,
            levels=levels,
        )

    def witness(self, labels: Iterable[str]) -> Instance | None:
        """One stable model of the database with ``labels``, or None; memoized."""
        key = frozenset(labels)
        if key in self._witness:
            return self._witness[key]
        models = self.stable_models(key, limit=1)
        result = models[0] if models else None
        with self._lock:
            self._witness[key] = result
        return result

    def is_consistent(self, labels: Iterable[str]) -> bool:
        return self.witness(labels) is not None


def stable_models(
    database: Instance, rules: RuleSet | Iterable[Rule], config: EngineConfig | None = None, limit: int = 0
) -> list[Instance]:
    rules = rules if isinstance(rules, RuleSet) else RuleSet(rules)
    return Reasoner(database, rules, config).stable_models(limit=limit)


def is_consistent(database: Instance, rules: RuleSet | Iterable[Rule], config: EngineConfig | None = None) -> bool:
    rules = rules if isinstance(rules, RuleSet) else RuleSet(rules)
    return Reasoner(database, rules, config).is_consistent(rules.labels)
