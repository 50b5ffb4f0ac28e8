"""Exception hierarchy shared by every repairqa module."""

from __future__ import annotations


class RepairQAError(Exception):
    """Base class for all errors raised by repairqa."""

    kind = "error"


class RuleError(RepairQAError, ValueError):
    """A rule, query or preference violates a construction invariant."""

    kind = "invalid-input"


class UnboundVariableError(RepairQAError, ValueError):
    kind = "unbound-variable"


class ParseError(RepairQAError, ValueError):
    """Syntax or well-formedness error with a source position (1-based)."""

    kind = "parse"

    def __init__(self, message: str, line: int = 1, column: int = 1):
        self.message = message
        self.line = line
        self.column = column
        super().__init__(f"line {line}, column {column}: {message}")


class PreferenceError(RepairQAError, ValueError):
    kind = "invalid-preference-parameters"


class GroundingError(RepairQAError):
    kind = "grounding"


class DepthLimitExceeded(GroundingError):
    """A skolem term grew deeper than the configured limit.

    ``chain`` holds the offending term, outermost first, rendered as text.
    """

    kind = "depth-limit-exceeded"

    def __init__(self, term: str, depth: int, limit: int):
        self.term = term
        self.depth = depth
        self.limit = limit
        super().__init__(
            f"skolem term {term} has depth {depth} > max depth {limit}; "
            "the rule set is probably not R-acyclic"
        )


class AtomCapExceeded(GroundingError):
    kind = "atom-cap-exceeded"


class BranchLimitExceeded(RepairQAError):
    """Too many undetermined negated atoms for the native assumption search."""

    kind = "neg-branch-limit"


class SearchLimitExceeded(RepairQAError):
    """The repair search space is larger than the configured guard allows."""

    kind = "subset-explosion"


class SearchTimeout(RepairQAError):
    kind = "search-timeout"


class UnsafeQueryError(RepairQAError, ValueError):
    kind = "unsafe-query"


class ClassViolation(RepairQAError):
    """Raised under strict class enforcement when a decidability class check fails."""

    kind = "class-violation"


class SolverError(RepairQAError):
    kind = "solver"


class SolverSpawnError(SolverError):
    kind = "spawn"


class SolverOutputError(SolverError):
    kind = "solver-output"


class SolverTimeout(SolverError):
    kind = "timeout"


class IdentifierCollision(SolverError):
    kind = "identifier-collision"
