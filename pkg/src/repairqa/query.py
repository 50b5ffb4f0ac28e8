"""Query checks, entailment over stable models and certain answers over preferred repairs."""

from __future__ import annotations

import logging
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable

from .analysis import is_guarded, is_r_acyclic
from .engine import EngineConfig, Reasoner
from .errors import ClassViolation, UnsafeQueryError
from .model import Atom, Instance, PreferenceSpec, Query, RuleSet, apply_substitution, match_atom, sorted_labels
from .repair import SearchConfig, preferred_repairs
from .syntax import atoms_text

log = logging.getLogger(__name__)

NOT_R_ACYCLIC = "rule set is not R-acyclic: termination is not guaranteed"
NOT_COVERED = "query is not covered"


def check_safe(query: Query) -> bool:
    """Every variable of a negated atom occurs in some positive atom."""
    positive = {v for a in query.pos for v in a.variables()}
    return all(v in positive for a in query.neg for v in a.variables())


def check_covered(query: Query) -> bool:
    """Every negated atom has a positive atom containing all of its arguments."""
    return all(any(set(n.args) <= set(p.args) for p in query.pos) for n in query.neg)


def _matches(atoms: list[Atom], index: dict, binding: dict):
    if not atoms:
        yield binding
        return
    first, rest = atoms[0], atoms[1:]
    for fact in index.get(first.signature, ()):
        extended = match_atom(first, fact, binding)
        if extended is not None:
            yield from _matches(rest, index, extended)


def holds_in_model(model: Iterable[Atom], query: Query) -> bool:
    """Is there a match of the positive part into ``model`` avoiding every negated atom?"""
    if not check_safe(query):
        raise UnsafeQueryError(f"unsafe query: {query}")
    facts = model if isinstance(model, (set, frozenset, Instance)) else frozenset(model)
    index: dict = {}
    for fact in facts:
        index.setdefault(fact.signature, []).append(fact)
    # most selective atoms first
    pos = sorted(query.pos, key=lambda a: len(index.get(a.signature, ())))
    for binding in _matches(pos, index, {}):
        if not any(apply_substitution(a, binding, ground=True) in facts for a in query.neg):
            return True
    return False


def _first_countermodel(models: Iterable[Instance], query: Query) -> Instance | None:
    for model in models:
        if not holds_in_model(model, query):
            return model
    return None


def entails_s(
    database,
    rules: RuleSet,
    query: Query,
    config: EngineConfig | None = None,
    labels: Iterable[str] | None = None,
    *,
    reasoner: Reasoner | None = None,
) -> bool:
    """True iff ``query`` holds in every stable model of the database with ``labels``.

    With no stable model at all the answer is vacuously true; a warning is issued.
    """
    reasoner = reasoner or Reasoner(database, rules, config)
    models = reasoner.stable_models(labels)
    if not models:
        warnings.warn("entailment over an inconsistent program is vacuously true", RuntimeWarning, stacklevel=2)
        return True
    return _first_countermodel(models, query) is None


@dataclass(frozen=True)
class Countermodel:
    repair: frozenset
    model: Instance
    reason: str

    def to_dict(self) -> dict:
        return {
            "repair": sorted_labels(self.repair),
            "model": atoms_text(self.model),
            "reason": self.reason,
        }


@dataclass(frozen=True)
class Verdict:
    entailed: bool
    repairs_examined: int
    countermodel: Countermodel | None = None
    caveats: tuple[str, ...] = ()
    repairs_found: int = 0

    def __post_init__(self) -> None:
        if self.entailed == (self.countermodel is not None):
            raise ValueError("a countermodel is present exactly when the query is not entailed")

    def to_dict(self) -> dict:
        return {
            "entailed": self.entailed,
            "repairs_found": self.repairs_found,
            "repairs_examined": self.repairs_examined,
            "countermodel": None if self.countermodel is None else self.countermodel.to_dict(),
            "caveats": list(self.caveats),
        }


def class_caveats(rules: RuleSet, query: Query, strict: bool = False) -> list[str]:
    """Caveats about termination and coveredness; under ``strict`` they become errors."""
    caveats = []
    if not is_r_acyclic(rules):
        if strict:
            raise ClassViolation(NOT_R_ACYCLIC)
        log.warning(NOT_R_ACYCLIC)
        caveats.append(NOT_R_ACYCLIC)
    if not check_covered(query):
        if strict and is_guarded(rules):
            raise ClassViolation(NOT_COVERED + " but the guarded rule set requires it")
        caveats.append(NOT_COVERED)
    return caveats


def certain_answer(
    database,
    rules: RuleSet,
    pref: PreferenceSpec,
    query: Query,
    config: EngineConfig | None = None,
    search: SearchConfig | None = None,
    *,
    strict: bool = False,
    method: str = "fast",
    reasoner: Reasoner | None = None,
) -> Verdict:
    """Does ``query`` hold in every stable model of every preferred repair?

    The first failing repair in repair order is reported as the countermodel.
    """
    if not check_safe(query):
        raise UnsafeQueryError(f"unsafe query: {query}")
    caveats = class_caveats(rules, query, strict)
    search = search or SearchConfig()
    reasoner = reasoner or Reasoner(database, rules, config)
    repairs = preferred_repairs(database, rules, pref, config, search, method=method, reasoner=reasoner)

    def failure(rep: frozenset) -> Instance | None:
        return _first_countermodel(reasoner.stable_models(rep), query)

    if search.jobs > 1 and len(repairs) > 1:
        with ThreadPoolExecutor(max_workers=search.jobs) as pool:
            results = list(pool.map(failure, repairs.repairs))
    else:
        results = []
        for rep in repairs.repairs:
            results.append(failure(rep))
            if results[-1] is not None:
                break
    for i, model in enumerate(results):
        if model is not None:
            cm = Countermodel(repairs.repairs[i], model, "no match of the query in this stable model")
            return Verdict(False, i + 1, cm, tuple(caveats), len(repairs))
    return Verdict(True, len(repairs), None, tuple(caveats), len(repairs))
