"""Slow, literal reference implementations used only by the tests.

Each oracle follows a definition as directly as possible and shares no search
logic with the package: exhaustive subsets, exhaustive substitutions,
exhaustive assignments.
"""

from __future__ import annotations

from itertools import chain, combinations, product

from repairqa.engine import GroundRule
from repairqa.model import Atom, Constant, Rule, Skolem, Variable, apply_substitution


def powerset(items):
    items = list(items)
    return [frozenset(c) for c in chain.from_iterable(combinations(items, k) for k in range(len(items) + 1))]


# ------------------------------------------------------------ stable models


def naive_least_model(rules, facts=()):
    model = set(facts)
    changed = True
    while changed:
        changed = False
        for r in rules:
            if r.head not in model and all(b in model for b in r.body_pos):
                model.add(r.head)
                changed = True
    return model


def naive_stable_models(rules, facts=()):
    """Every M over the atoms of the program with M = least model of the reduct wrt M."""
    rules = list(rules)
    atoms = set(facts)
    for r in rules:
        atoms.add(r.head)
        atoms.update(r.body_pos)
        atoms.update(r.body_neg)
    models = []
    for m in powerset(sorted(atoms, key=str)):
        reduct = [
            GroundRule(r.head, r.body_pos, (), r.label) for r in rules if not any(b in m for b in r.body_neg)
        ]
        if naive_least_model(reduct, facts) == set(m):
            models.append(m)
    return [m for m in models if not any(a.is_bottom for a in m)]


# ----------------------------------------------------------------- reliance


def _rule_terms(*rules):
    consts = set()
    for r in rules:
        for a in (*r.body_pos, *r.body_neg, *r.head):
            consts.update(t for t in a.args if isinstance(t, Constant))
    return sorted(consts, key=lambda c: c.name)


def _substitutions(r1: Rule, r2: Rule, nulls: bool):
    """All maps of the universal variables into rule constants, fresh constants and r1's nulls."""
    v1, v2 = list(r1.univ_vars), list(r2.univ_vars)
    universe = _rule_terms(r1, r2) + [Constant(f"@k{i}") for i in range(len(v1) + len(v2))]
    for values1 in product(universe, repeat=len(v1)):
        theta1 = dict(zip(v1, values1))
        h1 = apply_substitution(r1.skolem_head(), theta1)
        extra = []
        if nulls:
            extra = sorted({t for a in h1 for t in a.args if isinstance(t, Skolem)}, key=str)
        for values2 in product(universe + extra, repeat=len(v2)):
            yield {**theta1, **dict(zip(v2, values2))}, set(h1)


def _databases(relevant):
    ground = [a for a in relevant if not a.has_skolem() and not a.is_bottom]
    return powerset(sorted(set(ground), key=str))


def brute_positively_relies(r1: Rule, r2: Rule) -> bool:
    r1, r2 = r1.renamed("'1"), r2.renamed("'2")
    for theta, h1 in _substitutions(r1, r2, nulls=True):
        b1p = set(apply_substitution(r1.body_pos, theta))
        b1n = set(apply_substitution(r1.body_neg, theta))
        b2p = set(apply_substitution(r2.body_pos, theta))
        b2n = set(apply_substitution(r2.body_neg, theta))
        h2 = set(apply_substitution(r2.skolem_head(), theta))
        for d in _databases(b1p | b1n | b2p | b2n | h1 | h2):
            dh = d | h1
            if (
                b1p <= d
                and not b1n & d
                and b2p <= dh
                and not b2n & dh
                and not b2p <= d
                and not h2 <= dh
            ):
                return True
    return False


def brute_negatively_relies(r1: Rule, r2: Rule) -> bool:
    r1, r2 = r1.renamed("'1"), r2.renamed("'2")
    for theta, h1 in _substitutions(r1, r2, nulls=False):
        b1p = set(apply_substitution(r1.body_pos, theta))
        b1n = set(apply_substitution(r1.body_neg, theta))
        b2p = set(apply_substitution(r2.body_pos, theta))
        b2n = set(apply_substitution(r2.body_neg, theta))
        for d in _databases(b1p | b1n | b2p | b2n | h1):
            if b1p <= d and not b1n & d and b2p <= d and b2n & h1 and not b2n & d:
                return True
    return False


def is_valid_r_stratification(blocks, pos_edges, neg_edges) -> bool:
    where = {label: i for i, block in enumerate(blocks) for label in block}
    return all(where[a] <= where[b] for a, b in pos_edges) and all(where[a] < where[b] for a, b in neg_edges)


# -------------------------------------------------------------- preferences


def oracle_preceq(kind: str, s, t, levels=(), weights=None) -> bool:
    """``s ⪯ t`` spelled out clause by clause."""
    s, t = set(s), set(t)
    if kind == "subset":
        return s <= t
    if kind == "card":
        return len(s) <= len(t)
    if kind == "weight":
        return sum(weights[r] for r in s) <= sum(weights[r] for r in t)
    levels = [set(p) for p in levels]
    if kind == "prio-subset":
        if all(s & p == t & p for p in levels):
            return True
        return any(
            (s & levels[i]) < (t & levels[i]) and all(s & levels[j] == t & levels[j] for j in range(i))
            for i in range(len(levels))
        )
    if kind == "prio-card":
        if all(len(s & p) == len(t & p) for p in levels):
            return True
        return any(
            len(s & levels[i]) < len(t & levels[i])
            and all(len(s & levels[j]) == len(t & levels[j]) for j in range(i))
            for i in range(len(levels))
        )
    raise ValueError(kind)


def literal_repairs(labels, preceq, consistent):
    """Subsets S that are consistent and beaten by no consistent S' with S ≺ S'."""
    subsets = powerset(labels)
    out = []
    for s in subsets:
        if not consistent(s):
            continue
        if any(preceq(s, t) and not preceq(t, s) and consistent(t) for t in subsets):
            continue
        out.append(s)
    return set(out)


def literal_prqa(labels, preceq, consistent, entails) -> bool:
    """The double loop over all subsets, exactly as stated for the procedure."""
    subsets = powerset(labels)
    for s in subsets:
        if consistent(s):
            is_repair = True
            for t in subsets:
                if preceq(s, t) and not preceq(t, s) and consistent(t):
                    is_repair = False
                    break
            if is_repair and not entails(s):
                return False
    return True


# -------------------------------------------------------------------- query


def brute_holds(model, query) -> bool:
    """Try every assignment of the query variables to terms of the model."""
    model = set(model)
    universe = sorted({t for a in model for t in a.args} | {t for a in (*query.pos, *query.neg) for t in a.args if not isinstance(t, Variable)}, key=str)
    variables = sorted({v for a in (*query.pos, *query.neg) for v in a.variables()}, key=lambda v: v.name)
    for values in product(universe, repeat=len(variables)):
        h = dict(zip(variables, values))
        if all(apply_substitution(a, h) in model for a in query.pos) and not any(
            apply_substitution(a, h) in model for a in query.neg
        ):
            return True
    return False


def atom(pred, *args) -> Atom:
    return Atom(pred, tuple(Constant(a) if isinstance(a, str) else a for a in args))
