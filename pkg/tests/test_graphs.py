import itertools

import pytest
from hypothesis import given, settings, strategies as st

from gen import FIELDS, GRAPHS, SMALL_GRAPHS
from regionfj.graphs import (
    BOTTOM,
    EMPTY,
    Atom,
    FieldGraph,
    Var,
    fg_concat,
    fg_paths_upto,
    is_well_formed,
    render_term,
    term,
    term_concat,
    term_join,
)

F = FieldGraph.single("f")
NEXT = FieldGraph.single("next")
NEXTS = FieldGraph("next", {("next", "next")}, "next")


def brute_paths(g, k, fields):
    """Independent oracle: test every field sequence of length <= k."""
    if g.is_empty:
        return {()}
    out = set()
    for n in range(1, k + 1):
        for seq in itertools.product(sorted(fields), repeat=n):
            if seq[0] != g.head or seq[-1] != g.tail:
                continue
            if n == 1:
                if not g.edges:
                    out.add(seq)
                continue
            if all(pair in g.edges for pair in zip(seq, seq[1:])):
                out.add(seq)
    return out


def test_concat_identity_example():
    assert fg_concat(F, EMPTY) == F


def test_concat_singleton_with_itself():
    assert fg_concat(F, F) == FieldGraph("f", {("f", "f")}, "f")
    assert fg_concat(NEXT, NEXT) == NEXTS


def test_malformed_graphs_rejected():
    with pytest.raises(ValueError):
        FieldGraph("f", frozenset(), "g")
    with pytest.raises(ValueError):
        FieldGraph("f", {("f", "g"), ("h", "h")}, "g")  # h is off the path
    with pytest.raises(ValueError):
        FieldGraph("f", frozenset(), None)


def test_paths_examples():
    assert fg_paths_upto(EMPTY, 3) == {()}
    g = FieldGraph("n", {("n", "n"), ("n", "v")}, "v")
    # the bound counts fields, so n.n.n.v needs k = 4
    assert fg_paths_upto(g, 4) == {("n", "v"), ("n", "n", "v"), ("n", "n", "n", "v")}
    assert fg_paths_upto(g, 3) == {("n", "v"), ("n", "n", "v")}
    assert fg_paths_upto(FieldGraph("f", {("f", "f")}, "f"), 3) == {("f", "f"), ("f", "f", "f")}


def test_example_one_paths():
    # x.n.v and x.n.n.v are both represented, and every path ends in v
    g = FieldGraph("n", {("n", "n"), ("n", "v")}, "v")
    paths = fg_paths_upto(g, 4)
    assert ("n", "v") in paths and ("n", "n", "v") in paths
    assert all(p[-1] == "v" and set(p[:-1]) == {"n"} for p in paths)


def test_graph_universe_size():
    # ε plus every well-formed triple over two fields with up to four edges
    assert EMPTY in GRAPHS
    assert len(set(GRAPHS)) == len(GRAPHS)
    assert all(is_well_formed(g) for g in GRAPHS)


@pytest.mark.parametrize("g", GRAPHS, ids=str)
def test_paths_match_brute_force(g):
    assert fg_paths_upto(g, 4) == brute_paths(g, 4, FIELDS)


def test_concat_identity_exhaustive():
    for g in GRAPHS:
        assert fg_concat(g, EMPTY) == g
        assert fg_concat(EMPTY, g) == g


def test_concat_associative_exhaustive():
    for a, b, c in itertools.product(SMALL_GRAPHS, repeat=3):
        assert fg_concat(fg_concat(a, b), c) == fg_concat(a, fg_concat(b, c))


def test_concat_preserves_well_formedness():
    for a, b in itertools.product(GRAPHS, repeat=2):
        assert is_well_formed(fg_concat(a, b))


def test_concat_path_soundness():
    k = 3
    for a, b in itertools.product(SMALL_GRAPHS, repeat=2):
        joined = fg_paths_upto(fg_concat(a, b), 2 * k)
        for p in fg_paths_upto(a, k):
            for q in fg_paths_upto(b, k):
                assert p + q in joined


def test_term_join_examples():
    x = term(Var("x"))
    assert term_join(x, BOTTOM) == x
    assert term_join(x, x) == x
    assert term_join(term("A"), term(Atom("B", F))) == {Atom("A"), Atom("B", F)}


def test_term_concat_examples():
    assert term_concat(BOTTOM, F) == BOTTOM
    assert term_concat(term(Var("x")), F) == term(Atom(Var("x"), F))
    this = Var("this")
    got = term_concat(term(this, Atom(this, NEXT)), NEXT)
    assert got == term(Atom(this, NEXT), Atom(this, NEXTS))


terms = st.frozensets(st.builds(Atom, st.sampled_from([Var("x"), Var("y"), "A"]),
                                st.sampled_from(SMALL_GRAPHS)), max_size=4)


@settings(max_examples=200, deadline=None)
@given(terms, terms, terms)
def test_term_join_laws(u, v, w):
    assert term_join(u, v) == term_join(v, u)
    assert term_join(term_join(u, v), w) == term_join(u, term_join(v, w))
    assert term_join(u, u) == u
    assert term_join(u, BOTTOM) == u


def test_rendering():
    assert str(EMPTY) == "ε"
    assert str(FieldGraph("b", {("b", "a"), ("a", "b")}, "a")) == "⟨b | (a,b),(b,a) | a⟩"
    assert str(Atom(Var("y"), F)) == "y.f"
    assert str(Atom("A")) == "A"
    assert render_term(BOTTOM) == "⊥"
    assert render_term(term(Atom(Var("this"), NEXT), Var("this"))) == "this ∨ this.next"
