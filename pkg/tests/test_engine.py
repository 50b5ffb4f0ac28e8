import random
import threading

import pytest

from generators import random_ground_program
from oracles import naive_stable_models
from repairqa.analysis import stratify_signatures
from repairqa.engine import (
    EngineConfig,
    GroundProgram,
    GroundRule,
    Reasoner,
    gl_reduct,
    ground_relevant,
    is_consistent,
    least_model,
    skolemize,
    solve_ground,
    stable_models,
)
from repairqa.errors import AtomCapExceeded, BranchLimitExceeded, DepthLimitExceeded
from repairqa.model import Atom, Instance
from repairqa.syntax import parse_atom, parse_database, parse_instance, parse_program

R1_TO_R5 = {"r1", "r2", "r3", "r4", "r5"}


def p(name):
    return Atom(name)


def test_fixture_grounding(ex1):
    doc, db = ex1
    program = ground_relevant(skolemize(doc.rules), db, EngineConfig())
    assert len(program.rules) == 8
    heads = {str(r.head) for r in program.rules}
    assert "LiveIn(a,f_r2_y(a))" in heads and "bottom" in heads


def test_fixture_models(ex1):
    doc, db = ex1
    assert stable_models(db, doc.rules) == []
    models = Reasoner(db, doc.rules).stable_models(R1_TO_R5)
    expected = parse_instance(
        "Bat(a). Mammal(a). CanFly(a). LiveIn(a,f_r2_y(a)). Cave(f_r2_y(a)). Trogloxene(a). Bird(a)."
    )
    assert models == [expected]
    assert is_consistent(db, doc.rules.subset({"r1", "r2", "r3", "r4", "r6", "r7"}))


@pytest.mark.parametrize("strategy", ["auto", "branching"])
def test_strategies_agree_on_fixture(ex1, strategy):
    doc, db = ex1
    r = Reasoner(db, doc.rules, EngineConfig(strategy=strategy))
    assert r.stable_models(R1_TO_R5)[0] == Reasoner(db, doc.rules).stable_models(R1_TO_R5)[0]


def test_without_r1_negation_fires(ex1):
    doc, db = ex1
    (model,) = Reasoner(db, doc.rules).stable_models({"r2", "r3", "r4", "r5", "r6", "r7"})
    assert parse_atom("CanNotFly(a)") in model


def test_depth_limit_on_existential_cycle(cycle):
    doc, db = cycle
    with pytest.raises(DepthLimitExceeded) as info:
        stable_models(db, doc.rules, EngineConfig(max_skolem_depth=5))
    assert info.value.limit == 5


def test_atom_cap():
    doc = parse_program("r1: E(x,y), E(y,z) -> P(x,z).")
    db = parse_database(" ".join(f"E(c{i},c{j})." for i in range(12) for j in range(12)))
    with pytest.raises(AtomCapExceeded):
        stable_models(db, doc.rules, EngineConfig(max_ground_atoms=200))


def test_even_loop_has_two_models():
    doc = parse_program("r1: A(x), not P(x) -> Q(x).\nr2: A(x), not Q(x) -> P(x).")
    db = parse_database("A(a).")
    models = stable_models(db, doc.rules)
    assert [sorted(map(str, m)) for m in models] == [["A(a)", "P(a)"], ["A(a)", "Q(a)"]]
    assert len(stable_models(db, doc.rules, limit=1)) == 1


def test_odd_loop_has_no_model():
    doc = parse_program("r1: A(x), not P(x) -> P(x).")
    assert stable_models(parse_database("A(a)."), doc.rules) == []
    assert stable_models(parse_database("B(a)."), doc.rules) != []


def test_branch_guard():
    text = "\n".join(f"r{i}a: A(x), not P{i}(x) -> Q{i}(x).\nr{i}b: A(x), not Q{i}(x) -> P{i}(x)." for i in range(6))
    doc = parse_program(text)
    db = parse_database("A(a).")
    with pytest.raises(BranchLimitExceeded):
        stable_models(db, doc.rules, EngineConfig(max_neg_branch=4))
    assert len(stable_models(db, doc.rules)) == 2**6


def test_reduct_and_least_model():
    rules = [GroundRule(p("a"), (), (p("b"),)), GroundRule(p("b"), (p("c"),)), GroundRule(p("c"), (p("a"),))]
    reduct = gl_reduct(rules, {p("a"), p("c")})
    assert reduct == (GroundRule(p("a")), GroundRule(p("b"), (p("c"),)), GroundRule(p("c"), (p("a"),)))
    assert least_model(reduct) == Instance(frozenset({p("a"), p("b"), p("c")}))
    # a -> c -> b, but b blocks a: no stable model
    assert solve_ground(GroundProgram(tuple(rules))) == []


def test_ground_programs_match_naive_enumeration():
    rng = random.Random(11)
    for _ in range(120):
        rules, facts = random_ground_program(rng)
        program = GroundProgram(tuple(rules), Instance(facts))
        expected = sorted(sorted(map(str, m)) for m in naive_stable_models(rules, facts))
        got = sorted(sorted(map(str, m)) for m in solve_ground(program, strategy="branching"))
        assert got == expected
        assert sorted(sorted(map(str, m)) for m in solve_ground(program)) == expected


def test_stratified_and_branching_agree():
    rng = random.Random(5)
    seen = 0
    while seen < 60:
        rules, facts = random_ground_program(rng)
        levels = stratify_signatures(([r.head.signature], [a.signature for a in r.body_pos], [a.signature for a in r.body_neg]) for r in rules)
        if levels is None:
            continue
        program = GroundProgram(tuple(rules), Instance(facts))
        assert solve_ground(program, strategy="stratified") == solve_ground(program, strategy="branching")
        seen += 1


def test_memoized_checks_are_thread_safe(ex1):
    doc, db = ex1
    r = Reasoner(db, doc.rules)
    results = []
    subsets = [frozenset(doc.rules.labels) - {lab} for lab in doc.rules.labels]

    def work():
        results.append(tuple(r.is_consistent(s) for s in subsets))

    threads = [threading.Thread(target=work) for _ in range(6)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert len(set(results)) == 1


def test_config_validation():
    with pytest.raises(ValueError):
        EngineConfig(backend="magic")
    with pytest.raises(ValueError):
        EngineConfig(max_skolem_depth=0)
