import itertools
import random

from hypothesis import given, settings, strategies as st

import gen
from regionfj.graphs import BOTTOM, Atom, FieldGraph, Var, term
from regionfj.transform import (
    IDENTITY,
    AbstractTransformation as AT,
    Environment as Env,
    apply,
    apply_counted,
    at_lookup,
    bottom_transformation,
    compose,
    env_join,
    env_leq,
    instantiate_atom,
    instantiate_term,
    is_normal,
    join,
    reachable_fields,
    step,
    subst_constraint,
    subst_term,
)

x, y, z = Var("x"), Var("y"), Var("z")
f = FieldGraph.single("f")
FG = FieldGraph("f", {("f", "g")}, "g")
FLD = {"A": {"f", "g"}, "B": {"g"}, "C": {"f"}}

THREE_STMT_STMTS = [AT({"x": term(Atom(y, f))}), AT({"y": term("C")}), AT({}, {Atom(y, f): term(x)})]
THREE_STMT_SIGMA = AT({"x": term(Atom(y, f)), "y": term("C")}, {Atom("C", f): term(Atom(y, f))})
THREE_STMT_ENV = Env({"y": {"A"}}, {("A", "f"): {"B"}})


def three_stmt_composed():
    s1, s2, s3 = THREE_STMT_STMTS
    return compose(s3, compose(s2, s1))


# ---------------------------------------------------------------------------
# lookups and normal form
# ---------------------------------------------------------------------------


def test_lookup_examples():
    assert at_lookup(IDENTITY, "x") == term(x)
    assert at_lookup(IDENTITY, Atom("A", f)) == BOTTOM
    assert at_lookup(AT({"x": term(Atom(y, f))}), "x") == term(Atom(y, f))


def test_identity_assignments_and_bottom_constraints_are_dropped():
    s = AT({"x": term(x), "y": term("A")}, {Atom("A", f): BOTTOM})
    assert s.assigns == {"y": term("A")}
    assert s.constraints == {}
    assert is_normal(s)


# ---------------------------------------------------------------------------
# environments
# ---------------------------------------------------------------------------


def test_env_leq_examples():
    assert env_leq(Env(), Env({"x": {"A"}}))
    assert env_leq(Env({"x": {"A"}}), Env({"x": {"A", "B"}}))
    assert not env_leq(Env({"x": {"A"}}), Env({"y": {"A"}}))


def test_env_join_examples():
    assert env_join(Env(), Env({"x": {"A"}})) == Env({"x": {"A"}})
    assert env_join(Env({"x": {"A"}}), Env({"x": {"B"}})) == Env({"x": {"A", "B"}})
    assert env_join(Env({}, {("A", "f"): {"B"}}), Env({"x": {"A"}})) == \
        Env({"x": {"A"}}, {("A", "f"): {"B"}})


SMALL_ENV = Env({}, {("A", "f"): {"A", "B"}, ("B", "g"): {"C"}})


def test_reachable_fields_examples():
    assert reachable_fields(("A", "f"), frozenset(), SMALL_ENV, FLD) == {("A", "f")}
    assert reachable_fields(("A", "f"), {("f", "g")}, SMALL_ENV, FLD) == \
        {("A", "f"), ("A", "g"), ("B", "g")}
    assert reachable_fields(("A", "f"), {("f", "g")}, Env(), FLD) == {("A", "f")}


def test_instantiate_examples():
    assert instantiate_atom(Atom("A"), SMALL_ENV, FLD) == {"A"}
    assert instantiate_atom(Atom("A", f), SMALL_ENV, FLD) == {"A", "B"}
    assert instantiate_atom(Atom("A", FG), SMALL_ENV, FLD) == {"C"}
    assert instantiate_term(BOTTOM, SMALL_ENV) == frozenset()
    assert instantiate_term(term(x), Env({"x": {"A"}})) == {"A"}
    assert instantiate_term(term(Atom(y, f)), THREE_STMT_ENV) == {"B"}


# ---------------------------------------------------------------------------
# substitution, composition, join
# ---------------------------------------------------------------------------


def test_subst_examples():
    v = term(Atom(y, f), "B")
    assert subst_term(term(x), AT({"x": v})) == v
    assert subst_term(term("A"), AT({"A2": v})) == term("A")
    u = term(x, Atom(z, FG))
    assert subst_term(u, IDENTITY) == u


def test_subst_constraint_examples():
    theta = AT({"y": term("C"), "x": term(Atom(y, f))})
    assert subst_constraint(Atom(y, f), term(x), theta) == {Atom("C", f): term(Atom(y, f))}
    assert subst_constraint(Atom("A", FG), term(x), theta) == {Atom("A", FG): term(Atom(y, f))}
    assert subst_constraint(Atom(x, FG), term(y), AT({"x": BOTTOM})) == {}


def test_composition_worked_example():
    s1, s2, s3 = THREE_STMT_STMTS
    inner = compose(s2, s1)
    assert inner == AT({"x": term(Atom(y, f)), "y": term("C")})
    assert subst_constraint(Atom(y, f), term(x), inner) == {Atom("C", f): term(Atom(y, f))}
    assert compose(s3, inner) == THREE_STMT_SIGMA


def test_compose_examples():
    assert compose(AT({"x": term(z)}), AT({"x": term(y)})) == AT({"x": term(z)})
    a1 = compose(AT({}, {Atom("A", f): term(Var("z2"))}), AT({}, {Atom("A", f): term(z)}))
    assert a1 == AT({}, {Atom("A", f): term(z, Var("z2"))})


def test_join_examples():
    assert join(AT({"x": term("A")}), AT({"x": term("B")})) == AT({"x": term("A", "B")})
    assert join(AT({"x": term("A")}), IDENTITY) == AT({"x": term("A", x)})
    s = AT({"x": term("A")}, {Atom("A", f): term(y)})
    bot = bottom_transformation(["x"])
    assert join(s, bot) == s == join(bot, s)


def test_join_upper_bound_exhaustive_small():
    # every env over {x} x {A, B} with no fields
    for r in [set(), {"A"}, {"B"}, {"A", "B"}]:
        env = Env({"x": r})
        for s, t in itertools.product([AT({"x": term("A")}), AT({"x": term("B")}), IDENTITY], repeat=2):
            assert env_leq(env_join(apply(s, env), apply(t, env)), apply(join(s, t), env))


# ---------------------------------------------------------------------------
# step and apply
# ---------------------------------------------------------------------------

THREE_STMT_RESULT = Env({"x": {"B"}, "y": {"C"}}, {("A", "f"): {"B"}, ("C", "f"): {"B"}})


def test_three_statement_pipeline():
    assert three_stmt_composed() == THREE_STMT_SIGMA
    assert step(THREE_STMT_SIGMA, THREE_STMT_ENV, FLD) == THREE_STMT_RESULT
    env, updates = apply_counted(THREE_STMT_SIGMA, THREE_STMT_ENV, FLD)
    assert env == THREE_STMT_RESULT
    assert updates == 1


def test_step_examples():
    assert step(IDENTITY, THREE_STMT_ENV) == THREE_STMT_ENV
    assert step(AT({}, {Atom("A", f): term("B")}), Env(), FLD) == Env({}, {("A", "f"): {"B"}})


def test_apply_examples():
    assert apply(IDENTITY, THREE_STMT_ENV) == THREE_STMT_ENV
    # x reads y's old type, not the updated one
    got = apply(AT({"x": term(y), "y": term("C")}), Env({"y": {"A"}}))
    assert got == Env({"x": {"A"}, "y": {"C"}})


def test_apply_iteration_bound_on_random_inputs():
    regions, fields = len(gen.TYPES), len(gen.FIELDS)
    bound = regions * fields * regions + 1
    for s, _, env in gen.triples(2000, seed=7):
        _, n = apply_counted(s, env, gen.FLD)
        assert n <= bound


def test_step_is_deterministic_under_key_order():
    rng = random.Random(3)
    for s, _, env in gen.triples(300, seed=11):
        items = list(s.constraints.items())
        rng.shuffle(items)
        s2 = AT(dict(reversed(list(s.assigns.items()))), dict(items))
        assert step(s, env, gen.FLD) == step(s2, env, gen.FLD)


# ---------------------------------------------------------------------------
# properties over the bounded random universe
# ---------------------------------------------------------------------------


def test_composition_soundness_random():
    for s, t, env in gen.triples(1500, seed=1):
        lhs = apply(s, apply(t, env, gen.FLD), gen.FLD)
        assert env_leq(lhs, apply(compose(s, t), env, gen.FLD))


def test_both_associations_are_sound():
    rng = random.Random(5)
    for _ in range(500):
        a, b, c = (gen.rand_transformation(rng) for _ in range(3))
        env = gen.rand_env(rng)
        nested = apply(a, apply(b, apply(c, env, gen.FLD), gen.FLD), gen.FLD)
        for combined in (compose(a, compose(b, c)), compose(compose(a, b), c)):
            assert env_leq(nested, apply(combined, env, gen.FLD))


def test_join_upper_bound_random():
    for s, t, env in gen.triples(1500, seed=2):
        lhs = env_join(apply(s, env, gen.FLD), apply(t, env, gen.FLD))
        assert env_leq(lhs, apply(join(s, t), env, gen.FLD))


def test_identity_laws_and_normal_form_random():
    for s, t, _ in gen.triples(1000, seed=4):
        assert compose(s, IDENTITY) == s == compose(IDENTITY, s)
        assert join(s, t) == join(t, s)
        assert join(s, bottom_transformation(gen.VARS)) == s
        assert is_normal(compose(s, t)) and is_normal(join(s, t))


seeds = st.integers(min_value=0, max_value=2**32 - 1)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_instantiation_is_monotone(seed):
    rng = random.Random(seed)
    u = gen.rand_term(rng, 4)
    e1, e2 = gen.rand_env(rng), gen.rand_env(rng)
    big = env_join(e1, e2)
    assert instantiate_term(u, e1, gen.FLD) <= instantiate_term(u, big, gen.FLD)


@settings(max_examples=300, deadline=None)
@given(seeds)
def test_apply_is_monotone_and_extensive_on_fields(seed):
    rng = random.Random(seed)
    s = gen.rand_transformation(rng)
    e1, e2 = gen.rand_env(rng), gen.rand_env(rng)
    out1 = apply(s, e1, gen.FLD)
    assert env_leq(out1, apply(s, env_join(e1, e2), gen.FLD))
    assert env_leq(Env({}, e1.fields), out1)


def test_rendering():
    assert str(THREE_STMT_SIGMA) == "[x :↦ y.f, y :↦ C, C.f :≥ y.f]"
    assert str(THREE_STMT_RESULT) == "(x: B, y: C, A.f: B, C.f: B)"
    assert str(IDENTITY) == "[]"
