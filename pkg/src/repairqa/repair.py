"""Preference orders over rule subsets and the search for preferred repairs.

A repair is a rule subset S such that the database with S has a stable model
and no strictly preferred subset does. Every repair under the four refined
orders is also an inclusion-maximal repair, and (with positive weights) each
consistent set is dominated by some inclusion-maximal repair. The reference
algorithm therefore computes all inclusion-maximal repairs and keeps their
maxima under the requested order. The fast paths exploit the shape of each
order and are tested against the reference.
"""

from __future__ import annotations

import enum
import heapq
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from itertools import combinations
from typing import Iterable, Sequence

from .engine import EngineConfig, Reasoner
from .errors import PreferenceError, SearchLimitExceeded, SearchTimeout
from .model import (
    Instance,
    PreferenceKind,
    PreferenceSpec,
    RepairSet,
    RuleSet,
    labelset_key,
    sorted_labels,
)


class Comparison(enum.Enum):
    LESS = "less"
    GREATER = "greater"
    EQUIVALENT = "equivalent"
    INCOMPARABLE = "incomparable"


class PreferenceOrder:
    """The preorder induced by a :class:`PreferenceSpec` on subsets of ``labels``."""

    def __init__(self, spec: PreferenceSpec, labels: Iterable[str]):
        self.spec = spec
        self.labels = frozenset(labels)
        spec.validate(sorted_labels(self.labels))
        self.levels = tuple(frozenset(level) for level in spec.prioritization)

    def _check(self, s: frozenset) -> None:
        unknown = s - self.labels
        if unknown:
            raise PreferenceError("labels outside the rule set: " + ", ".join(sorted_labels(unknown)))

    def weight(self, s: Iterable[str]) -> int:
        return sum(self.spec.weights[label] for label in s)

    def preceq(self, s: Iterable[str], t: Iterable[str]) -> bool:
        """``s ⪯ t``: t is at least as preferred as s."""
        s, t = frozenset(s), frozenset(t)
        self._check(s)
        self._check(t)
        kind = self.spec.kind
        if kind is PreferenceKind.SUBSET:
            return s <= t
        if kind is PreferenceKind.CARDINALITY:
            return len(s) <= len(t)
        if kind is PreferenceKind.WEIGHT:
            return self.weight(s) <= self.weight(t)
        for level in self.levels:
            a, b = s & level, t & level
            if kind is PreferenceKind.PRIO_SUBSET:
                if a != b:
                    return a < b
            elif len(a) != len(b):
                return len(a) < len(b)
        return True

    def less(self, s: Iterable[str], t: Iterable[str]) -> bool:
        """Strict preference ``s ≺ t``."""
        return self.preceq(s, t) and not self.preceq(t, s)

    def compare(self, s: Iterable[str], t: Iterable[str]) -> Comparison:
        le, ge = self.preceq(s, t), self.preceq(t, s)
        if le and ge:
            return Comparison.EQUIVALENT
        if le:
            return Comparison.LESS
        if ge:
            return Comparison.GREATER
        return Comparison.INCOMPARABLE

    def maxima(self, sets: Sequence[frozenset]) -> list[frozenset]:
        return [s for s in sets if not any(self.less(s, t) for t in sets)]


def compare(s: Iterable[str], t: Iterable[str], pref: PreferenceOrder) -> Comparison:
    return pref.compare(s, t)


@dataclass(frozen=True)
class SearchConfig:
    # inclusion search refuses rule sets larger than this; fast paths refuse
    # any single search level with more than 2**max_rules candidates
    max_rules: int = 24
    jobs: int = 1
    time_budget: float | None = None


class _Search:
    def __init__(self, reasoner: Reasoner, config: SearchConfig):
        self.reasoner = reasoner
        self.config = config
        self.labels = tuple(reasoner.rules.labels)
        self.deadline = None if config.time_budget is None else time.monotonic() + config.time_budget

    def tick(self) -> None:
        if self.deadline is not None and time.monotonic() > self.deadline:
            raise SearchTimeout(f"repair search exceeded {self.config.time_budget} s")

    def consistent(self, labels: frozenset) -> bool:
        self.tick()
        return self.reasoner.is_consistent(labels)

    def consistent_many(self, sets: Sequence[frozenset]) -> list[bool]:
        if self.config.jobs <= 1 or len(sets) < 2:
            return [self.consistent(s) for s in sets]
        with ThreadPoolExecutor(max_workers=self.config.jobs) as pool:
            return list(pool.map(self.consistent, sets))

    def guard_level(self, n: int, k: int) -> None:
        if math.comb(n, k) > 2 ** self.config.max_rules:
            raise SearchLimitExceeded(
                f"{math.comb(n, k)} candidate subsets at one search level exceed the guard "
                f"2**{self.config.max_rules}"
            )

    def _chunks(self, candidates: Iterable[frozenset], size: int = 256) -> Iterable[list[frozenset]]:
        chunk: list[frozenset] = []
        for c in candidates:
            chunk.append(c)
            if len(chunk) == size:
                self.tick()
                yield chunk
                chunk = []
        if chunk:
            yield chunk

    # -- inclusion
    def subset(self) -> list[frozenset]:
        n = len(self.labels)
        if n > self.config.max_rules:
            raise SearchLimitExceeded(
                f"{n} rules exceed the inclusion-search guard of {self.config.max_rules}"
            )
        found: list[frozenset] = []
        for size in range(n, -1, -1):
            # sets of one size never contain each other, so only earlier levels dominate
            earlier = list(found)
            candidates = (
                s
                for s in map(frozenset, combinations(self.labels, size))
                if not any(s < r for r in earlier)
            )
            for chunk in self._chunks(candidates):
                found.extend(s for s, ok in zip(chunk, self.consistent_many(chunk)) if ok)
        return found

    # -- cardinality: stop at the first level holding consistent sets
    def cardinality(self) -> list[frozenset]:
        n = len(self.labels)
        for size in range(n, -1, -1):
            self.guard_level(n, size)
            hits: list[frozenset] = []
            for chunk in self._chunks(map(frozenset, combinations(self.labels, size))):
                hits.extend(s for s, ok in zip(chunk, self.consistent_many(chunk)) if ok)
            if hits:
                return hits
        return []

    # -- weights: enumerate deletions by increasing deleted weight
    def weight(self, order: PreferenceOrder) -> list[frozenset]:
        ranked = sorted(self.labels, key=lambda lab: order.spec.weights[lab])
        w = [order.spec.weights[lab] for lab in ranked]
        full = frozenset(self.labels)
        heap: list[tuple[int, tuple[int, ...]]] = [(0, ())]
        best: int | None = None
        hits: list[frozenset] = []
        popped = 0
        while heap:
            removed, idx = heapq.heappop(heap)
            if best is not None and removed > best:
                break
            popped += 1
            if popped > 2 ** self.config.max_rules:
                raise SearchLimitExceeded("weighted search exceeded its candidate guard")
            candidate = full - {ranked[i] for i in idx}
            if self.consistent(candidate):
                best = removed
                hits.append(candidate)
            last = idx[-1] if idx else -1
            if last + 1 < len(ranked):
                heapq.heappush(heap, (removed + w[last + 1], idx + (last + 1,)))
                if idx:
                    heapq.heappush(heap, (removed - w[last] + w[last + 1], idx[:-1] + (last + 1,)))
        return hits

    # -- prioritized inclusion: lexicographic over levels, most reliable first
    def prio_subset(self, levels: Sequence[tuple[str, ...]], idx: int = 0,
                    prefix: frozenset = frozenset()) -> list[frozenset]:
        if idx == len(levels):
            return [prefix] if self.consistent(prefix) else []
        level = levels[idx]
        kept: list[frozenset] = []
        results: list[frozenset] = []
        for size in range(len(level), -1, -1):
            self.guard_level(len(level), size)
            for combo in combinations(level, size):
                t = frozenset(combo)
                if any(t < k for k in kept):
                    continue
                sub = self.prio_subset(levels, idx + 1, prefix | t)
                if sub:
                    kept.append(t)
                    results.extend(sub)
            if size == len(level) and kept:
                # the whole level is keepable: every smaller choice is dominated
                break
        return results

    # -- prioritized cardinality: lexicographic count vectors
    def prio_card(self, levels: Sequence[tuple[str, ...]], idx: int = 0,
                  prefix: frozenset = frozenset()) -> tuple[tuple[int, ...], list[frozenset]] | None:
        if idx == len(levels):
            return ((), [prefix]) if self.consistent(prefix) else None
        level = levels[idx]
        for size in range(len(level), -1, -1):
            self.guard_level(len(level), size)
            best: tuple[int, ...] | None = None
            sets: list[frozenset] = []
            for combo in combinations(level, size):
                sub = self.prio_card(levels, idx + 1, prefix | frozenset(combo))
                if sub is None:
                    continue
                vec, found = sub
                if best is None or vec > best:
                    best, sets = vec, list(found)
                elif vec == best:
                    sets.extend(found)
            if best is not None:
                return (size,) + best, sets
        return None


def _repair_set(reasoner: Reasoner, spec: PreferenceSpec, repairs: Iterable[frozenset]) -> RepairSet:
    ordered = sorted(set(repairs), key=labelset_key)
    witnesses: list[Instance] = []
    for rep in ordered:
        witness = reasoner.witness(rep)
        assert witness is not None, "repairs are consistent by construction"
        witnesses.append(witness)
    return RepairSet(spec, tuple(ordered), tuple(witnesses))


def _reasoner(database, rules: RuleSet, config, reasoner) -> Reasoner:
    if reasoner is not None:
        return reasoner
    return Reasoner(database, rules, config or EngineConfig())


def subset_repairs(
    database,
    rules: RuleSet,
    config: EngineConfig | None = None,
    search: SearchConfig | None = None,
    *,
    reasoner: Reasoner | None = None,
) -> RepairSet:
    """All inclusion-maximal consistent rule subsets, by top-down breadth-first search."""
    reasoner = _reasoner(database, rules, config, reasoner)
    found = _Search(reasoner, search or SearchConfig()).subset()
    return _repair_set(reasoner, PreferenceSpec(PreferenceKind.SUBSET), found)


def preferred_repairs(
    database,
    rules: RuleSet,
    pref: PreferenceSpec,
    config: EngineConfig | None = None,
    search: SearchConfig | None = None,
    *,
    method: str = "fast",
    reasoner: Reasoner | None = None,
) -> RepairSet:
    """Preferred repairs under ``pref``.

    ``method="reference"`` takes the maxima of the inclusion repairs;
    ``method="fast"`` uses the order-specific search.
    """
    if method not in ("fast", "reference"):
        raise ValueError(f"unknown method {method!r}")
    order = PreferenceOrder(pref, rules.labels)
    reasoner = _reasoner(database, rules, config, reasoner)
    runner = _Search(reasoner, search or SearchConfig())
    kind = pref.kind
    if kind is PreferenceKind.SUBSET:
        found = runner.subset()
    elif method == "reference":
        found = order.maxima(runner.subset())
    elif kind is PreferenceKind.CARDINALITY:
        found = runner.cardinality()
    elif kind is PreferenceKind.WEIGHT:
        found = runner.weight(order)
    elif kind is PreferenceKind.PRIO_SUBSET:
        found = runner.prio_subset(pref.prioritization)
    else:
        result = runner.prio_card(pref.prioritization)
        found = result[1] if result else []
    return _repair_set(reasoner, pref, found)
