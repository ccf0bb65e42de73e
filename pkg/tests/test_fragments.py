from fractions import Fraction

import pytest

from pregma.fragments import build_fragment, local_rows
from pregma.labeling import classes_for_colours
from pregma.model import reachable_nonterminals

F = Fraction


@pytest.fixture()
def running_rows(running):
    phi1 = classes_for_colours(running, frozenset({"V1"}))
    phi2 = classes_for_colours(running, frozenset({"V2"}))
    frag = build_fragment(running, "A")
    return frag, local_rows(running, running.mu, frag, phi1, phi2,
                            include_inputs=True)


def test_fragment_layout(running):
    frag = build_fragment(running, "A")
    assert sorted(n.key for n in frag.starts) == [
        ("base", "dead"), ("base", "fork"), ("base", "next"), ("base", "win"),
    ]
    # one child copy, glued onto (next, fork)
    assert frag.glue == {0: (("base", "next"), ("base", "fork"))}
    kinds = {k: n.kind for k, n in frag.nodes.items()}
    assert kinds[("base", "s")] == "input"
    assert kinds[("copy", 0, "next")] == "child"
    assert frag.nodes[("base", "win")].can is not None
    assert frag.nodes[("base", "s")].can is None


def test_first_hit_rows(running_rows):
    _, rows = running_rows
    fork = rows[("base", "fork")]
    assert fork.win == F(1, 2)
    assert fork.loss == F(1, 4)
    assert fork.hit(("base", "s")) == F(1, 4)
    nxt = rows[("base", "next")]
    assert nxt.win == 0
    assert nxt.hit(("base", "fork")) == F(1, 2)
    assert nxt.hit(("copy", 0, "next")) == F(1, 2)
    assert rows[("base", "win")].win == 1
    assert rows[("base", "dead")].loss == 1


def test_rows_from_inputs(running_rows):
    # rows for the rule's own inputs record the first step only, with no
    # win/loss gate: their colours belong to the level above
    _, rows = running_rows
    s = rows[("base", "s")]
    assert s.win == 0 and s.loss == 0
    assert s.hit(("base", "t")) == F(1, 2)
    assert s.hit(("base", "next")) == F(1, 2)
    assert s.hit(("base", "fork")) == 0


def test_input_rows_are_off_by_default(running):
    phi1 = classes_for_colours(running, frozenset({"V1"}))
    phi2 = classes_for_colours(running, frozenset({"V2"}))
    frag = build_fragment(running, "A")
    rows = local_rows(running, running.mu, frag, phi1, phi2)
    assert ("base", "s") not in rows
    assert set(rows) == {n.key for n in frag.starts}


def test_axiom_fragment_rows(running):
    phi1 = classes_for_colours(running, frozenset({"V1"}))
    phi2 = classes_for_colours(running, frozenset({"V2"}))
    frag = build_fragment(running, "Z")
    rows = local_rows(running, running.mu, frag, phi1, phi2)
    v0 = rows[("base", "v0")]
    assert v0.hit(("base", "t0")) == F(1, 2)
    assert v0.hit(("copy", 0, "next")) == F(1, 2)
    assert rows[("base", "t0")].loss == 1


@pytest.mark.parametrize("colour_pair", [("V1", "V2"), (None, "sink")])
def test_rows_partition_unit_mass(running, dag, updrift, critical, colour_pair):
    phi1_name, phi2_name = colour_pair
    for g in (running, dag, updrift, critical):
        names = g.colour_names
        if phi2_name not in names:
            continue
        phi1 = classes_for_colours(
            g, frozenset({phi1_name}) if phi1_name in names else None
        )
        phi2 = classes_for_colours(g, frozenset({phi2_name}))
        for name in reachable_nonterminals(g):
            frag = build_fragment(g, name)
            rows = local_rows(g, g.mu, frag, phi1, phi2)
            for key, row in rows.items():
                assert row.total() == 1, (g.axiom, name, key)
                assert row.win >= 0 and row.loss >= 0
                assert all(p > 0 for p in row.hits.values())
