from fractions import Fraction

import pytest

from pregma.model import (
    CanonicalVertex,
    Grammar,
    GrammarError,
    Hypergraph,
    Rule,
    component_ids,
    expand,
    parallel_rewrite,
    reachable_component,
    reachable_nonterminals,
    rewrite_one,
    validate_grammar,
)


def test_hypergraph_rejects_duplicate_vertex():
    h = Hypergraph()
    h.add_vertex("a")
    with pytest.raises(GrammarError):
        h.add_vertex("a")
    with pytest.raises(GrammarError):
        Hypergraph(vertices=["a", "a"])


def test_colour_sets_and_arc_indexes():
    h = Hypergraph()
    for v in ("a", "b"):
        h.add_vertex(v)
    h.add_arc("e", "a", "b")
    h.add_arc("e", "a", "a")
    h.add_colour("red", "b")
    assert h.colour_sets() == {"a": frozenset(), "b": frozenset({"red"})}
    assert [arc.target for arc in h.out_arcs()["a"]] == ["b", "a"]
    assert [arc.source for arc in h.in_arcs()["b"]] == ["a"]


def test_corpus_grammars_validate(running, dag, updrift, critical):
    for g in (running, dag, updrift, critical):
        assert validate_grammar(g) == []


def _broken_grammar() -> Grammar:
    rhs = Hypergraph()
    rhs.add_vertex("x")
    rhs.add_arc("missing", "x", "ghost")
    rhs.add_hyperarc("A", ("x", "x"))
    return Grammar(
        terminals={"a": 2},
        nonterminals={"Z": 1, "A": 2},
        axiom="Z",
        rules=[Rule("Z", ("x", "x"), rhs)],
        mu={"a": Fraction(3, 2)},
    )


def test_validate_reports_structural_issues():
    issues = validate_grammar(_broken_grammar())
    codes = {i.code for i in issues}
    assert "axiom-arity" in codes
    assert "missing-rule" in codes  # A has no rule
    assert "input-repeat" in codes
    assert "arc-label" in codes
    assert "arc-endpoint" in codes
    assert "hyperarc-repeat" in codes
    assert "prob-range" in codes


def test_reachable_nonterminals(running):
    assert reachable_nonterminals(running) == frozenset({"Z", "A"})


def test_expand_levels_and_classes(running):
    e = expand(running, 2)
    assert [i.rule for i in e.instances] == ["Z", "A", "A"]
    assert [i.level for i in e.instances] == [0, 1, 2]
    # axiom contributes 2 vertices, each copy of A four more
    assert len(e.graph.vertices) == 10
    levels = sorted(cv.level for cv in e.vertices.values())
    assert levels == [0, 0, 1, 1, 1, 1, 2, 2, 2, 2]
    # the remaining hyperarc pins down the frontier
    assert len(e.graph.hyperarcs) == 1
    assert e.frontier == frozenset(e.graph.hyperarcs[0].vertices)
    v0 = e.axiom_vertex("v0")
    assert e.vertices[v0].can == CanonicalVertex("Z", "v0")


def test_expand_instance_gluing(running):
    # the child's first input is glued onto next, the second onto fork
    e = expand(running, 2)
    child = e.instances[2]
    parent = e.instances[1]
    assert child.parent == 1
    assert child.mapping["s"] == parent.mapping["next"]
    assert child.mapping["t"] == parent.mapping["fork"]


def test_expand_rejects_negative_depth(running):
    with pytest.raises(GrammarError):
        expand(running, -1)


def test_axiom_vertex_unknown_name(running):
    e = expand(running, 1)
    with pytest.raises(GrammarError, match="not a vertex of the axiom rule"):
        e.axiom_vertex("nope")


def test_rewrite_one_matches_parallel_on_single_hyperarc(running):
    start = running.axiom_rule().rhs
    one = rewrite_one(running, start)
    par = parallel_rewrite(running, start)
    assert len(one.vertices) == len(par.vertices)
    assert len(one.arcs) == len(par.arcs)
    assert sorted(h.label for h in one.hyperarcs) == sorted(
        h.label for h in par.hyperarcs
    )


def test_rewrite_one_bad_index(running):
    with pytest.raises(GrammarError):
        rewrite_one(running, running.axiom_rule().rhs, index=5)


def test_component_ids_stays_inside_graph(running):
    e = expand(running, 3)
    v0 = e.axiom_vertex("v0")
    ids = component_ids(e, v0)
    assert v0 in ids
    assert ids <= set(e.graph.vertices)
    with pytest.raises(GrammarError):
        component_ids(e, "no-such-id")


def test_reachable_component_has_no_hyperarcs(running):
    sub, vertices = reachable_component(running, "v0", 3)
    assert sub.hyperarcs == []
    assert set(sub.vertices) == set(vertices)
    assert all(a.source in vertices and a.target in vertices for a in sub.arcs)
