from fractions import Fraction

import pytest

from pregma.gio import ParseError, emit_dot, parse_grammar, serialize_grammar
from pregma.model import expand, validate_grammar


SMALL = """
nonterminal Z 0
nonterminal B 1
terminal a 2
colour red
prob a 1
absorbing red
axiom Z

rule Z
  vertex v
  hyperarc B v

rule B inputs x
  vertex y
  arc a x y
  colour red y
"""


def test_parse_small_grammar():
    g = parse_grammar(SMALL)
    assert validate_grammar(g) == []
    assert g.axiom == "Z"
    assert g.nonterminals == {"Z": 0, "B": 1}
    assert g.terminals == {"a": 2, "red": 1}
    assert g.mu == {"a": Fraction(1)}
    assert g.absorbing == {"red"}
    b = g.rule_for("B")
    assert b.inputs == ("x",)
    assert [str(v) for v in b.rhs.vertices] == ["x", "y"]


@pytest.mark.parametrize(
    "name", ["running.gg", "dag.gg", "updrift.gg", "critical.gg"]
)
def test_corpus_round_trip(corpus_dir, name):
    text = (corpus_dir / name).read_text()
    g = parse_grammar(text)
    once = serialize_grammar(g)
    again = serialize_grammar(parse_grammar(once))
    assert once == again
    h = parse_grammar(once)
    assert validate_grammar(h) == []
    assert h.nonterminals == g.nonterminals
    assert h.terminals == g.terminals
    assert h.mu == g.mu
    assert h.absorbing == g.absorbing
    for rule in g.rules:
        other = h.rule_for(rule.lhs)
        assert other.inputs == rule.inputs
        assert sorted(other.rhs.arcs) == sorted(rule.rhs.arcs)
        assert sorted(other.rhs.colours) == sorted(rule.rhs.colours)
        assert sorted(other.rhs.hyperarcs) == sorted(rule.rhs.hyperarcs)


def test_parse_reports_line_numbers():
    with pytest.raises(ParseError) as err:
        parse_grammar("nonterminal Z 0\nwibble Z\n")
    assert err.value.lineno == 2
    assert "wibble" in str(err.value)


@pytest.mark.parametrize(
    "text,needle",
    [
        ("terminal a 2\nprob a 1/2\nprob a 1/3\n", "twice"),
        ("terminal a 2\nprob a 0/0\n", "bad probability"),
        ("nonterminal Z 0\naxiom Z\nrule Z\n  arc a v\n", "arc needs"),
        ("nonterminal Z 0\naxiom Z\nrule Z\n  nocolour c v\n", "default-colour"),
        ("nonterminal Z 0\nrule Z\n  vertex v\n", "axiom"),
    ],
)
def test_parse_rejects_bad_lines(text, needle):
    with pytest.raises(ParseError) as err:
        parse_grammar(text)
    assert needle in str(err.value)


def test_vertices_register_on_first_mention():
    g = parse_grammar(
        "nonterminal Z 0\nterminal a 2\naxiom Z\n"
        "rule Z\n  arc a p q\n  arc a q p\n"
    )
    assert [str(v) for v in g.axiom_rule().rhs.vertices] == ["p", "q"]


def test_blank_line_closes_a_rule_block():
    with pytest.raises(ParseError, match="unknown keyword"):
        parse_grammar(
            "nonterminal Z 0\nterminal a 2\naxiom Z\n"
            "rule Z\n  vertex p\n\n  arc a p p\n"
        )


def test_serializer_omits_redundant_vertex_lines():
    g = parse_grammar(
        "nonterminal Z 0\nterminal a 2\naxiom Z\n"
        "rule Z\n  arc a p q\n"
    )
    assert "vertex" not in serialize_grammar(g)


def test_serializer_keeps_isolated_vertices(running):
    g = parse_grammar(
        "nonterminal Z 0\nterminal a 2\naxiom Z\n"
        "rule Z\n  vertex p q lone\n  arc a p q\n"
    )
    text = serialize_grammar(g)
    assert "vertex p q lone" in text
    assert parse_grammar(text).axiom_rule().rhs.has_vertex("lone")
    # running's rule A declares vertices in an order its arcs do not replay
    assert "vertex s t win fork dead next" in serialize_grammar(running)


def test_default_colour_expands_to_explicit_marks(running):
    # the serialized form has no default-colour line, yet parses back to the
    # same marks, dead staying bare
    text = serialize_grammar(running)
    assert "default-colour" not in text
    g = parse_grammar(text)
    a = g.rule_for("A")
    marks = a.rhs.colour_sets()
    assert marks["dead"] == frozenset({"sink"})
    assert "V1" in marks["next"]


def test_emit_dot_mentions_levels(running):
    e = expand(running, 2)
    dot = emit_dot(e.graph, e.vertices)
    assert dot.startswith("digraph")
    assert "level" in dot
    legs = sum(len(h.vertices) for h in e.graph.hyperarcs)
    assert dot.count("->") == len(e.graph.arcs) + legs
