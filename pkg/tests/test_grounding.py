"""Least-model computation and rule-instance grounding."""

import random

import pytest

from lrnn import (Atom, CapacityError, ConstRef, Constant, ParamRef, Variable,
                  ground, least_herbrand_model, parse_examples, parse_template)

from helpers import load_examples, load_template
from oracles import naive_instances, naive_model, random_nonrecursive_program


def _atom(pred, *names):
    return Atom(pred, tuple(Constant(n) for n in names))


# ---------------------------------------------------------------------------
# Pinned micro-world groundings


def test_family_model_exact():
    t = load_template("family")
    model = least_herbrand_model(t)
    assert model.atoms == {
        _atom("female", "alice"),
        _atom("parent", "bob", "alice"),
        _atom("parent", "eve", "alice"),
        _atom("mother", "bob", "alice"),
        _atom("mother", "eve", "alice"),
    }
    assert model.universe == ("alice", "bob", "eve")


def test_family_instances_exact():
    t = load_template("family")
    g = ground(t)
    assert [(i.clause_id, i.theta, str(i.head)) for i in g.instances] == [
        ("family:0", (("C", "bob"), ("M", "alice")), "mother(bob,alice)"),
        ("family:0", (("C", "eve"), ("M", "alice")), "mother(eve,alice)"),
    ]
    # the father rule matches nothing: no male/1 anywhere
    assert all(i.clause_id != "family:1" for i in g.instances)


def test_family_ground_facts():
    t = load_template("family")
    g = ground(t)
    got = [(type(ref).__name__, getattr(ref, "pid", None), str(atom))
           for atom, ref in g.ground_facts]
    assert got == [
        ("ParamRef", "family:2", "female(alice)"),
        ("ParamRef", "family:3", "parent(bob,alice)"),
        ("ParamRef", "family:4", "parent(eve,alice)"),
    ]


def test_instance_substitution_mapping():
    t = load_template("family")
    inst = ground(t).instances[0]
    theta = inst.substitution()
    assert theta == {Variable("C"): Constant("bob"), Variable("M"): Constant("alice")}
    assert inst.body == (_atom("parent", "bob", "alice"), _atom("female", "alice"))


def test_explosives_bond_instances():
    t = load_template("explosives")
    examples = {ex.example_id: ex for ex in load_examples("explosives")}
    hydrogen = ground(t, examples["m1"].facts)
    pairs = {i.theta for i in hydrogen.instances if i.clause_id == "explosives:6"}
    assert pairs == {(("A", "h1"), ("B", "h2")), (("A", "h2"), ("B", "h1"))}
    water = ground(t, examples["m2"].facts)
    pairs = {i.theta for i in water.instances if i.clause_id == "explosives:6"}
    assert pairs == {
        (("A", "o1"), ("B", "h1")), (("A", "h1"), ("B", "o1")),
        (("A", "o1"), ("B", "h2")), (("A", "h2"), ("B", "o1")),
    }


def test_multi_round_chain_derivation():
    t = parse_template("1.0 :: p1(X) :- p0(X).\n1.0 :: p2(X) :- p1(X).\n"
                       "1.0 :: p3(X) :- p2(X), p0(X).", "chain")
    facts = ((1.0, _atom("p0", "a")),)
    model = least_herbrand_model(t, facts)
    assert _atom("p3", "a") in model
    assert len(model.atoms) == 4


def test_nonground_template_fact_expands_over_universe():
    t = parse_template("? :: f(X,Y).\n1.0 :: p(a).\n1.0 :: p(b).", "src")
    g = ground(t)
    f_atoms = {str(a) for a in g.model.atoms if a.pred == "f"}
    assert f_atoms == {"f(a,a)", "f(a,b)", "f(b,a)", "f(b,b)"}
    refs = [(ref.pid, str(atom)) for atom, ref in g.ground_facts if atom.pred == "f"]
    assert [pid for pid, _ in refs] == ["src:0"] * 4  # one shared parameter


def test_head_only_variable_expands():
    t = parse_template("1.0 :: p1(X,Y) :- p0(X).\n1.0 :: c(u).\n1.0 :: c(v).", "src")
    facts = ((1.0, _atom("p0", "u")),)
    g = ground(t, facts)
    heads = {str(i.head) for i in g.instances}
    assert heads == {"p1(u,u)", "p1(u,v)"}
    thetas = {i.theta for i in g.instances}
    assert thetas == {(("X", "u"), ("Y", "u")), (("X", "u"), ("Y", "v"))}


def test_constants_inside_rules_join():
    t = parse_template("1.0 :: q(X) :- p(X,a).", "src")
    facts = ((1.0, _atom("p", "b", "a")), (1.0, _atom("p", "b", "c")))
    model = least_herbrand_model(t, facts)
    assert _atom("q", "b") in model
    assert len([a for a in model.atoms if a.pred == "q"]) == 1


def test_zero_weight_fact_still_derives():
    t = parse_template("1.0 :: q(X) :- p(X).", "src")
    model = least_herbrand_model(t, ((0.0, _atom("p", "a")),))
    assert _atom("q", "a") in model


def test_duplicate_example_fact_atoms_keep_both_weights():
    t = parse_template("1.0 :: q(X) :- p(X).", "src")
    facts = ((0.3, _atom("p", "a")), (0.4, _atom("p", "a")))
    g = ground(t, facts)
    assert len([a for a in g.model.atoms if a.pred == "p"]) == 1
    weights = [ref.value for atom, ref in g.ground_facts if atom.pred == "p"]
    assert weights == [0.3, 0.4]


def test_empty_template_model_is_the_example():
    t = parse_template("", "src")
    facts = ((1.0, _atom("p", "a")),)
    model = least_herbrand_model(t, facts)
    assert model.atoms == {_atom("p", "a")}


def test_instances_sorted_by_clause_then_theta():
    for seed in range(10):
        template, facts = random_nonrecursive_program(random.Random(seed))
        g = ground(template, facts)
        ordinal = {c.clause_id: i for i, c in enumerate(template.clauses)}
        keys = [(ordinal[i.clause_id], i.theta) for i in g.instances]
        assert keys == sorted(keys)


# ---------------------------------------------------------------------------
# Equivalence with the brute-force oracle


def test_model_matches_naive_fixpoint():
    for seed in range(30):
        template, facts = random_nonrecursive_program(random.Random(seed))
        model = least_herbrand_model(template, facts)
        assert model.atoms == naive_model(template, facts), f"seed {seed}"


def test_instances_match_naive_enumeration():
    for seed in range(30):
        template, facts = random_nonrecursive_program(random.Random(seed))
        g = ground(template, facts)
        got = {(i.clause_id, i.theta) for i in g.instances}
        assert got == naive_instances(template, facts, g.model.atoms), f"seed {seed}"


def test_adding_a_fact_is_monotone():
    for seed in range(15):
        rng = random.Random(seed)
        template, facts = random_nonrecursive_program(rng)
        preds = {a.signature for _, a in facts} | {c.head.signature for c in template.clauses}
        pred, arity = sorted(preds)[rng.randrange(len(preds))]
        universe = sorted({t.name for _, a in facts for t in a.args}) or ["a"]
        extra = Atom(pred, tuple(Constant(rng.choice(universe)) for _ in range(arity)))
        before = ground(template, facts)
        after = ground(template, facts + ((1.0, extra),))
        assert before.model.atoms <= after.model.atoms
        assert {(i.clause_id, i.theta) for i in before.instances} <= \
               {(i.clause_id, i.theta) for i in after.instances}


def test_every_instance_is_active():
    for seed in range(20):
        template, facts = random_nonrecursive_program(random.Random(seed))
        g = ground(template, facts)
        for inst in g.instances:
            assert inst.head in g.model
            for b in inst.body:
                assert b in g.model


def test_grounding_is_deterministic():
    for seed in range(5):
        template, facts = random_nonrecursive_program(random.Random(seed))
        a, b = ground(template, facts), ground(template, facts)
        assert a.model.atoms == b.model.atoms
        assert a.instances == b.instances
        assert a.ground_facts == b.ground_facts


# ---------------------------------------------------------------------------
# Capacity


def test_capacity_error():
    t = parse_template("? :: f(X,Y).\n1.0 :: p(a).\n1.0 :: p(b).\n1.0 :: p(c).", "src")
    with pytest.raises(CapacityError) as exc:
        least_herbrand_model(t, capacity=3)
    assert exc.value.cap == 3
    assert exc.value.count > 3


def test_capacity_generous_enough_passes():
    t = parse_template("? :: f(X,Y).\n1.0 :: p(a).\n1.0 :: p(b).", "src")
    model = least_herbrand_model(t, capacity=6)
    assert len(model.atoms) == 6
