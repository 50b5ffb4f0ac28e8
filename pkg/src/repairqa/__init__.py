"""Certain query answering over inconsistent normal existential rule sets via preferred rule repairs."""

__version__ = "0.1.0"

from .analysis import analyze, is_guarded, is_r_acyclic, negatively_relies, positively_relies, r_stratify, reliance_graph
from .engine import EngineConfig, Reasoner, is_consistent, stable_models
from .errors import RepairQAError
from .model import (
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
)
from .query import Verdict, certain_answer, check_covered, check_safe, entails_s, holds_in_model
from .repair import Comparison, PreferenceOrder, SearchConfig, compare, preferred_repairs, subset_repairs
from .syntax import parse_database, parse_program, parse_query

__all__ = [
    "Atom", "Comparison", "Constant", "Database", "EngineConfig", "Instance", "PreferenceKind",
    "PreferenceOrder", "PreferenceSpec", "Query", "Reasoner", "RepairQAError", "RepairSet", "Rule",
    "RuleSet", "SearchConfig", "Skolem", "Variable", "Verdict", "analyze", "certain_answer",
    "check_covered", "check_safe", "compare", "entails_s", "holds_in_model", "is_consistent",
    "is_guarded", "is_r_acyclic", "negatively_relies", "parse_database", "parse_program",
    "parse_query", "positively_relies", "preferred_repairs", "r_stratify", "reliance_graph",
    "stable_models", "subset_repairs",
]
