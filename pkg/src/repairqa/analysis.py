"""Rule reliance and the class checks built on it.

Positive and negative reliance quantify over all databases and substitutions.
The decision procedure here only looks at canonical witnesses:

* the substitution is enumerated up to renaming of fresh constants: each
  variable goes to a constant of the two rules or to a fresh constant
  (set partitions over the fresh ones), because every condition is
  invariant under injective renaming of constants not named in the rules;
* variables of the relying rule may additionally be sent to the nulls that
  the skolemized head of the other rule creates;
* the database is the smallest one the positive conditions force
  (B1+θ ∪ (B2+θ minus H1θ), resp. B1+θ ∪ B2+θ), since every remaining
  condition can only get harder to satisfy when the database grows.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import networkx as nx

from .model import (
    BOTTOM_PREDICATE,
    Atom,
    Constant,
    Rule,
    RuleSet,
    Skolem,
    Variable,
    apply_substitution,
    label_key,
    sorted_labels,
)

Signature = tuple[str, int]


def _assignments(
    variables: Sequence[Variable], existing: Sequence, prefix: str
) -> Iterator[dict]:
    """All maps of ``variables`` into ``existing`` plus fresh constants, up to renaming of the fresh ones."""

    def rec(i: int, current: dict, fresh: int) -> Iterator[dict]:
        if i == len(variables):
            yield dict(current)
            return
        var = variables[i]
        for value in existing:
            current[var] = value
            yield from rec(i + 1, current, fresh)
        for k in range(fresh):
            current[var] = Constant(f"{prefix}{k}")
            yield from rec(i + 1, current, fresh)
        current[var] = Constant(f"{prefix}{fresh}")
        yield from rec(i + 1, current, fresh + 1)
        del current[var]

    yield from rec(0, {}, 0)


def _null_free(atoms: Iterable[Atom]) -> bool:
    return not any(a.has_skolem() for a in atoms)


def _prepare(r1: Rule, r2: Rule) -> tuple[Rule, Rule]:
    return r1.renamed("#1"), r2.renamed("#2")


def _rule_constants(*rules: Rule) -> list[Constant]:
    seen: dict = {}
    for rule in rules:
        for atom in (*rule.body_pos, *rule.body_neg, *rule.head):
            for t in atom.args:
                if isinstance(t, Constant):
                    seen.setdefault(t, None)
    return list(seen)


def _fresh_prefix(base: str, constants: Sequence[Constant]) -> str:
    prefix = "#" + base
    while any(c.name.startswith(prefix) for c in constants):
        prefix = "#" + prefix
    return prefix


def _theta_pairs(r1: Rule, r2: Rule, with_nulls: bool) -> Iterator[tuple[dict, tuple[Atom, ...]]]:
    head1 = r1.skolem_head()
    constants = _rule_constants(r1, r2)
    p1, p2 = _fresh_prefix("c", constants), _fresh_prefix("d", constants)
    for theta1 in _assignments(r1.univ_vars, constants, p1):
        h1 = apply_substitution(head1, theta1)
        values: dict = dict.fromkeys(constants)
        values.update(dict.fromkeys(theta1.values()))
        if with_nulls:
            for atom in h1:
                for t in atom.args:
                    if isinstance(t, Skolem):
                        values.setdefault(t, None)
        for theta2 in _assignments(r2.univ_vars, list(values), p2):
            yield {**theta1, **theta2}, h1


def positively_relies(r1: Rule, r2: Rule) -> bool:
    """True iff ``r2`` positively relies on ``r1`` (r1 ->+ r2)."""
    if not {a.signature for a in r1.head} & {a.signature for a in r2.body_pos}:
        return False
    r1, r2 = _prepare(r1, r2)
    head2 = r2.skolem_head()
    for theta, h1 in _theta_pairs(r1, r2, with_nulls=True):
        b1p = set(apply_substitution(r1.body_pos, theta))
        b1n = set(apply_substitution(r1.body_neg, theta))
        b2p = set(apply_substitution(r2.body_pos, theta))
        b2n = set(apply_substitution(r2.body_neg, theta))
        h1s = set(h1)
        db = b1p | (b2p - h1s)
        if not _null_free(db):
            continue
        extended = db | h1s
        if (
            not (b1n & db)
            and b2p <= extended
            and not (b2n & extended)
            and not b2p <= db
            and not set(apply_substitution(head2, theta)) <= extended
        ):
            return True
    return False


def negatively_relies(r1: Rule, r2: Rule) -> bool:
    """True iff ``r2`` negatively relies on ``r1`` (r1 ->- r2)."""
    if not {a.signature for a in r1.head} & {a.signature for a in r2.body_neg}:
        return False
    r1, r2 = _prepare(r1, r2)
    for theta, h1 in _theta_pairs(r1, r2, with_nulls=False):
        b1p = set(apply_substitution(r1.body_pos, theta))
        b1n = set(apply_substitution(r1.body_neg, theta))
        b2p = set(apply_substitution(r2.body_pos, theta))
        b2n = set(apply_substitution(r2.body_neg, theta))
        db = b1p | b2p
        if not _null_free(db):
            continue
        if not (b1n & db) and (b2n & set(h1)) and not (b2n & db):
            return True
    return False


@dataclass(frozen=True)
class RelianceGraph:
    nodes: tuple[str, ...]
    pos_edges: frozenset = frozenset()
    neg_edges: frozenset = frozenset()

    def digraph(self, negative: bool = True) -> nx.DiGraph:
        g = nx.DiGraph()
        g.add_nodes_from(self.nodes)
        g.add_edges_from(self.pos_edges)
        if negative:
            g.add_edges_from(self.neg_edges)
        return g


def reliance_graph(rules: RuleSet) -> RelianceGraph:
    pos, neg = set(), set()
    for r1 in rules:
        for r2 in rules:
            if positively_relies(r1, r2):
                pos.add((r1.label, r2.label))
            if negatively_relies(r1, r2):
                neg.add((r1.label, r2.label))
    return RelianceGraph(rules.labels, frozenset(pos), frozenset(neg))


def _cyclic_components(g: nx.DiGraph) -> Iterator[set]:
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(g.has_edge(n, n) for n in comp):
            yield comp


def is_r_acyclic(rules: RuleSet, graph: RelianceGraph | None = None) -> bool:
    graph = graph or reliance_graph(rules)
    g = graph.digraph(negative=False)
    return not any(
        any(rules[label].is_existential for label in comp) for comp in _cyclic_components(g)
    )


def r_stratify(rules: RuleSet, graph: RelianceGraph | None = None) -> list[list[str]] | None:
    """Partition the rules so that ->+ never goes down and ->- always goes up.

    Blocks are the strongly connected components of the reliance graph,
    emitted in topological order with ties broken by label.
    """
    graph = graph or reliance_graph(rules)
    g = graph.digraph()
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    for a, b in graph.neg_edges:
        if members[a] == members[b]:
            return None
    blocks = {n: sorted_labels(cond.nodes[n]["members"]) for n in cond.nodes}
    order = nx.lexicographical_topological_sort(cond, key=lambda n: label_key(blocks[n][0]))
    return [blocks[n] for n in order]


def is_guarded(rules: Iterable[Rule]) -> bool:
    for rule in rules:
        universal = set(rule.univ_vars)
        if universal and not any(universal <= set(a.variables()) for a in rule.body_pos):
            return False
    return True


def stratify_signatures(
    deps: Iterable[tuple[Iterable[Signature], Iterable[Signature], Iterable[Signature]]],
) -> dict[Signature, int] | None:
    """Level map for (heads, positive body, negative body) dependency triples.

    Returns ``None`` when some cycle passes through a negative dependency.
    """
    g = nx.DiGraph()
    strict: set[tuple[Signature, Signature]] = set()
    for heads, pos, neg in deps:
        heads = list(heads)
        g.add_nodes_from(heads)
        for h in heads:
            for s in pos:
                g.add_edge(s, h)
            for s in neg:
                g.add_edge(s, h)
                strict.add((s, h))
    cond = nx.condensation(g)
    members = cond.graph["mapping"]
    if any(members[s] == members[h] for s, h in strict):
        return None
    comp_level: dict[int, int] = {}
    comp_strict: dict[tuple[int, int], bool] = {}
    for s, h in strict:
        comp_strict[(members[s], members[h])] = True
    for c in nx.topological_sort(cond):
        level = 0
        for p in cond.predecessors(c):
            level = max(level, comp_level[p] + (1 if comp_strict.get((p, c)) else 0))
        comp_level[c] = level
    return {sig: comp_level[members[sig]] for sig in g.nodes}


def rule_dependencies(rule: Rule) -> tuple[list[Signature], list[Signature], list[Signature]]:
    return (
        [a.signature for a in rule.head],
        [a.signature for a in rule.body_pos],
        [a.signature for a in rule.body_neg],
    )


def predicate_stratify(rules: Iterable[Rule]) -> dict[Signature, int] | None:
    return stratify_signatures(rule_dependencies(r) for r in rules)


def _sig_text(sig: Signature) -> str:
    name, arity = sig
    return f"bottom/0" if name == BOTTOM_PREDICATE else f"{name}/{arity}"


@dataclass(frozen=True)
class ClassReport:
    r_acyclic: bool
    r_stratification: list[list[str]] | None
    guarded: bool
    stratified: dict[Signature, int] | None
    graph: RelianceGraph = field(repr=False, compare=False, default=None)

    def to_dict(self) -> dict:
        key = lambda e: (label_key(e[0]), label_key(e[1]))  # noqa: E731
        out = {
            "r_acyclic": self.r_acyclic,
            "r_stratification": self.r_stratification,
            "guarded": self.guarded,
            "stratified": None
            if self.stratified is None
            else {_sig_text(s): lv for s, lv in sorted(self.stratified.items())},
        }
        if self.graph is not None:
            out["reliance"] = {
                "positive": [list(e) for e in sorted(self.graph.pos_edges, key=key)],
                "negative": [list(e) for e in sorted(self.graph.neg_edges, key=key)],
            }
        return out


def analyze(rules: RuleSet) -> ClassReport:
    graph = reliance_graph(rules)
    return ClassReport(
        r_acyclic=is_r_acyclic(rules, graph),
        r_stratification=r_stratify(rules, graph),
        guarded=is_guarded(rules),
        stratified=predicate_stratify(rules),
        graph=graph,
    )
