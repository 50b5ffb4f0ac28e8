"""Synthetic benchmark instances and timing of repair search.

An instance has a reliable core and a few unreliable rules. The core is
R-acyclic and stratified: every rule derives a fresh predicate from strictly
older ones, and existential rules only feed rules that project the null away.
The unreliable rules sit at the lowest priority with the smallest weights;
they are built from two patterns that clash with the data: a constraint over
two base predicates that share a constant, and a negation rule whose
conclusion is forbidden by the next rule.
"""

from __future__ import annotations

import random
import time
from dataclasses import dataclass

from .engine import EngineConfig, Reasoner
from .errors import SearchLimitExceeded, SearchTimeout
from .model import Atom, Constant, Database, PreferenceKind, PreferenceSpec, Rule, RuleSet, Variable
from .repair import SearchConfig, preferred_repairs

BASE_UNARY = 10
X, Y, Z = Variable("x"), Variable("y"), Variable("z")


def _u(i: int, var: Variable = X) -> Atom:
    return Atom(f"U{i}", (var,))


@dataclass(frozen=True)
class BenchInstance:
    name: str
    database: Database
    rules: RuleSet
    prioritization: tuple[tuple[str, ...], ...]
    weights: dict

    def preference(self, kind: PreferenceKind | str) -> PreferenceSpec:
        kind = PreferenceKind.parse(kind) if isinstance(kind, str) else kind
        return PreferenceSpec(kind, self.prioritization, self.weights)


def generate(n_facts: int = 10_000, n_reliable: int = 120, n_unreliable: int = 3, seed: int = 0) -> BenchInstance:
    rng = random.Random(seed)
    n_consts = max(4, n_facts // 5)
    const = [Constant(f"c{i}") for i in range(n_consts)]

    facts: set[Atom] = set()
    # unary base facts on U0..U9 and a binary Link relation
    while len(facts) < n_facts:
        if rng.random() < 0.6:
            facts.add(Atom(f"U{rng.randrange(BASE_UNARY)}", (rng.choice(const),)))
        else:
            facts.add(Atom("Link", (rng.choice(const), rng.choice(const))))

    rules: list[Rule] = []
    unary = list(range(BASE_UNARY))  # predicates a new rule may read
    has: list[int] = []  # binary predicates holding nulls
    for j in range(n_reliable):
        head = BASE_UNARY + j
        pick = rng.random()
        a, b = rng.sample(unary, 2) if len(unary) > 1 else (unary[0], unary[0])
        label = f"r{j + 1}"
        if pick < 0.45:
            rule = Rule(label, (_u(a), _u(b)), (), (_u(head),))
        elif pick < 0.65:
            rule = Rule(label, (Atom("Link", (X, Y)), _u(a, Y)), (), (_u(head),))
        elif pick < 0.8:
            rule = Rule(label, (_u(a),), (_u(b),), (_u(head),))
        elif pick < 0.9 or not has:
            rule = Rule(label, (_u(a),), (), (Atom(f"Has{head}", (X, Z)), _u(head)), (Z,))
            has.append(head)
        else:
            rule = Rule(label, (Atom(f"Has{rng.choice(has)}", (X, Z)), _u(a)), (), (_u(head),))
        rules.append(rule)
        unary.append(head)

    # unreliable rules: keep them on base predicates so they clash with the data
    for i in range(n_unreliable):
        label = f"u{i + 1}"
        a, b = 2 * (i % 5), 2 * (i % 5) + 1
        if i % 3 == 0:
            facts.add(_u(a, const[i]))
            facts.add(_u(b, const[i]))
            rules.append(Rule(label, (_u(a), _u(b))))
        elif i % 3 == 1:
            facts.add(_u(a, const[i]))
            facts.discard(_u(b, const[i]))
            rules.append(Rule(label, (_u(a),), (_u(b),), (Atom(f"Flag{i}", (X,)),)))
        else:
            rules.append(Rule(label, (Atom(f"Flag{i - 1}", (X,)),)))

    reliable = tuple(r.label for r in rules[:n_reliable])
    unreliable = tuple(r.label for r in rules[n_reliable:])
    levels = tuple(level for level in (reliable, unreliable) if level)
    weights = {lab: 1000 for lab in reliable}
    weights.update({lab: i + 1 for i, lab in enumerate(unreliable)})
    return BenchInstance(
        f"d{n_facts}t{n_unreliable}",
        Database(frozenset(facts)),
        RuleSet(rules),
        levels,
        weights,
    )


@dataclass(frozen=True)
class BenchRow:
    kind: str
    seconds: float
    status: str
    repairs: int
    checks: int

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "seconds": round(self.seconds, 3),
            "status": self.status,
            "repairs": self.repairs,
            "checks": self.checks,
        }


def time_kind(instance: BenchInstance, kind, config: EngineConfig | None = None, search=None) -> BenchRow:
    spec = instance.preference(kind)
    search = search or SearchConfig()
    reasoner = Reasoner(instance.database, instance.rules, config)
    start = time.perf_counter()
    try:
        result = preferred_repairs(instance.database, instance.rules, spec, config, search, reasoner=reasoner)
        status, count = "ok", len(result)
    except SearchTimeout:
        status, count = "timeout", 0
    except SearchLimitExceeded:
        status, count = "limit", 0
    return BenchRow(spec.kind.value, time.perf_counter() - start, status, count, reasoner.checks)


def run_bench(
    instance: BenchInstance,
    kinds=("prio-subset", "prio-card", "weight"),
    config: EngineConfig | None = None,
    jobs: int = 1,
    baseline_budget: float | None = 60.0,
) -> list[BenchRow]:
    """Time each preference kind, then plain inclusion search with a time budget and no size guard."""
    rows = [time_kind(instance, k, config, SearchConfig(jobs=jobs)) for k in kinds]
    if baseline_budget is not None:
        baseline = SearchConfig(max_rules=len(instance.rules), jobs=jobs, time_budget=baseline_budget)
        rows.append(time_kind(instance, PreferenceKind.SUBSET, config, baseline))
    return rows
