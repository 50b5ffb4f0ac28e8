import pytest

from repairqa.errors import PreferenceError, RuleError, UnboundVariableError
from repairqa.model import (
    BOTTOM,
    Atom,
    Constant,
    Database,
    Instance,
    PreferenceKind,
    PreferenceSpec,
    Query,
    Rule,
    RuleSet,
    Skolem,
    Variable,
    apply_substitution,
    label_key,
    match_atom,
    sorted_labels,
)

x, y, z = Variable("x"), Variable("y"), Variable("z")
a, b = Constant("a"), Constant("b")


def test_natural_label_order():
    assert sorted_labels(["r10", "r2", "r1", "u1"]) == ["r1", "r2", "r10", "u1"]
    assert label_key("r2") < label_key("r10")


def test_skolem_head_uses_frontier():
    r = Rule("r2", (Atom("Bat", (x,)),), (), (Atom("LiveIn", (x, z)), Atom("Cave", (z,))), (z,))
    sk = Skolem("r2", "z", (x,))
    assert r.frontier == (x,)
    assert r.skolem_head() == (Atom("LiveIn", (x, sk)), Atom("Cave", (sk,)))
    assert sk.functor == "f_r2_z"
    assert r.is_existential and not r.is_constraint


def test_renaming_keeps_skolem_functor():
    r = Rule("r", (Atom("P", (x,)),), (), (Atom("R", (x, z)),), (z,))
    copy = r.renamed("#1")
    assert copy.univ_vars == (Variable("x#1"),)
    assert copy.skolem_head()[0].args[1].functor == r.skolem_head()[0].args[1].functor


@pytest.mark.parametrize(
    "kwargs, message",
    [
        (dict(body_pos=(Atom("P", (x,)),), head=(Atom("Q", (y,)),)), "positive body"),
        (dict(body_pos=(Atom("P", (x,)),), body_neg=(Atom("S", (y,)),)), "positive body"),
        (dict(body_pos=(Atom("P", (x,)),), head=(Atom("Q", (x, z)),), exist_vars=(x,)), "occur in the body"),
        (dict(body_pos=(BOTTOM,)), "only occur as a head"),
        (dict(body_pos=(Atom("P", (x,)),), head=(BOTTOM, Atom("Q", (x,)))), "combined"),
        (dict(body_pos=(Atom("P", (Skolem("r", "z", (x,)),)),)), "function terms"),
        (dict(body_pos=(Atom("P", (x,)),), head=()), "empty head"),
    ],
)
def test_rule_validation(kwargs, message):
    with pytest.raises(RuleError, match=message):
        Rule("r", **kwargs)


def test_ruleset_rejects_duplicate_labels():
    r = Rule("r1", (Atom("P", (x,)),))
    with pytest.raises(RuleError):
        RuleSet([r, r])
    rs = RuleSet([r, Rule("r2", (Atom("Q", (x,)),))])
    assert rs.subset(["r2"]).labels == ("r2",)
    with pytest.raises(RuleError):
        rs.subset(["r9"])


def test_database_is_ground_and_null_free():
    Database(frozenset({Atom("P", (a,))}))
    with pytest.raises(RuleError):
        Database(frozenset({Atom("P", (x,))}))
    with pytest.raises(RuleError):
        Database(frozenset({Atom("P", (Skolem("r", "z", (a,)),))}))
    with pytest.raises(RuleError):
        Database(frozenset({BOTTOM}))
    # instances may hold nulls
    Instance(frozenset({Atom("P", (Skolem("r", "z", (a,)),))}))


def test_query_rejects_nulls():
    with pytest.raises(RuleError):
        Query((Atom("P", (Skolem("r", "z", (a,)),)),))
    assert Query((Atom("P", (x,)),), (Atom("Q", (x, y)),)).variables() == [x, y]


def test_match_and_substitute():
    pattern = Atom("R", (x, y, x))
    assert match_atom(pattern, Atom("R", (a, b, a))) == {x: a, y: b}
    assert match_atom(pattern, Atom("R", (a, b, b))) is None
    assert match_atom(pattern, Atom("R", (a, b, a)), {x: b}) is None
    assert apply_substitution(pattern, {x: a}) == Atom("R", (a, y, a))
    with pytest.raises(UnboundVariableError):
        apply_substitution(pattern, {x: a}, ground=True)


def test_match_inside_skolem_terms():
    null = Skolem("r2", "y", (a,))
    assert match_atom(Atom("C", (x,)), Atom("C", (null,))) == {x: null}
    assert match_atom(Atom("C", (Skolem("r2", "y", (x,)),)), Atom("C", (null,))) == {x: a}


def test_preference_spec_validation():
    labels = ["r1", "r2", "r3"]
    PreferenceSpec("prio-subset", (("r1",), ("r2", "r3"))).validate(labels)
    with pytest.raises(PreferenceError, match="partition"):
        PreferenceSpec("prio-card", (("r1",), ("r2",))).validate(labels)
    with pytest.raises(PreferenceError, match="two priority levels"):
        PreferenceSpec("prio-card", (("r1", "r2"), ("r2", "r3"))).validate(labels)
    with pytest.raises(PreferenceError, match="positive"):
        PreferenceSpec("weight", weights={"r1": 0})
    with pytest.raises(PreferenceError, match="missing weights"):
        PreferenceSpec("weight", weights={"r1": 1}).validate(labels)
    with pytest.raises(PreferenceError):
        PreferenceKind.parse("lexicographic")
    assert PreferenceKind.parse("cardinality") is PreferenceKind.CARDINALITY


def test_atom_rendering():
    assert str(Atom("LiveIn", (a, Skolem("r2", "y", (a,))))) == "LiveIn(a,f_r2_y(a))"
    assert str(BOTTOM) == "bottom"
    assert str(Constant("Hello world")) == '"Hello world"'
    assert str(Constant("x")) == '"x"'  # would read back as a variable otherwise
