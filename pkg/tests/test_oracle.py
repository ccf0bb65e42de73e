from fractions import Fraction

import pytest

from pregma.oracle import (
    HorizonError,
    PathQuery,
    TotalityError,
    bounded_until,
    sample_until,
    truncate,
)

V1 = frozenset({"V1"})
V2 = frozenset({"V2"})


def q(h, phi1=V1, phi2=V2):
    return PathQuery(phi1, phi2, "v0", h)


def test_truncate_state_count(running):
    mc = truncate(running, 8)
    # 2 axiom vertices plus 4 per level
    assert len(mc.states) == 34
    assert len(mc.trans) == 34
    assert mc.colour_mask(V2).sum() == 8
    assert mc.colour_mask(None).all()


def test_truncate_gives_sinks_self_loops(running):
    mc = truncate(running, 3)
    t0 = mc.resolve("t0")
    assert mc.trans[t0] == [(t0, Fraction(1))]


def test_resolve_accepts_names_and_ids(running):
    mc = truncate(running, 2)
    i = mc.resolve("v0")
    assert mc.resolve(i) == i
    with pytest.raises(Exception, match="not a vertex of the axiom rule"):
        mc.resolve("not-a-vertex")


def test_bounded_until_exact_prefix(running):
    mc = truncate(running, 8)
    values = [bounded_until(mc, q(h)) for h in range(6)]
    assert values == [
        Fraction(0), Fraction(0), Fraction(0),
        Fraction(1, 8), Fraction(3, 16), Fraction(7, 32),
    ]


def test_bounded_until_is_monotone_in_horizon(running, dag, updrift):
    for g in (running, dag, updrift):
        mc = truncate(g, 14)
        start = str(g.axiom_rule().rhs.vertices[0])
        phi2 = frozenset({next(iter(g.absorbing & g.colour_names))})
        last = Fraction(0)
        for h in range(12):
            value = bounded_until(mc, PathQuery(None, phi2, start, h))
            assert value >= last
            assert value <= 1
            last = value


def test_truncate_rejects_unnormalised_mu(running):
    with pytest.raises(TotalityError, match="outgoing mass 7/6"):
        truncate(running, 4, mu={"a": Fraction(1, 2), "d": Fraction(1, 3)})


def test_truncate_needs_every_label_priced(running):
    with pytest.raises(Exception, match="no probability for arc label d"):
        truncate(running, 4, mu={"a": Fraction(1, 2)})


def test_frontier_guard(running):
    mc = truncate(running, 3)
    # the frontier sits 3 steps from v0, so horizon 2 is fine and 3 is not
    assert bounded_until(mc, q(2)) == 0
    with pytest.raises(HorizonError, match="deepen the truncation"):
        bounded_until(mc, q(3))


def test_frontier_guard_spares_winning_frontiers(running):
    # every frontier vertex carries V1, so a V1 target needs no deepening
    mc = truncate(running, 3)
    assert bounded_until(mc, PathQuery(None, V1, "v0", 10)) == 1


def test_sample_until_frozen_run(running):
    mc = truncate(running, 45)
    res = sample_until(mc, q(40), 5000, 11)
    assert (res.hits, res.misses, res.escapes, res.n) == (1569, 3431, 0, 5000)
    assert res.estimate_lo == Fraction(1569, 5000)
    assert res.estimate_hi == Fraction(1569, 5000)


def test_sample_until_is_deterministic_per_seed(running):
    mc = truncate(running, 12)
    a = sample_until(mc, q(8), 400, 7)
    b = sample_until(mc, q(8), 400, 7)
    c = sample_until(mc, q(8), 400, 8)
    assert (a.hits, a.misses, a.escapes) == (b.hits, b.misses, b.escapes)
    assert (a.hits, a.misses) != (c.hits, c.misses)


def test_sample_until_tracks_the_exact_value(running):
    # 400 runs at horizon 8: agreement with the DP value to within a loose
    # binomial band, no escapes possible this shallow
    mc = truncate(running, 12)
    exact = float(bounded_until(mc, q(8)))
    res = sample_until(mc, q(8), 400, 3)
    assert res.escapes == 0
    assert abs(res.hits / 400 - exact) < 0.1


def test_sample_until_needs_positive_n(running):
    mc = truncate(running, 4)
    with pytest.raises(ValueError, match="positive sample count"):
        sample_until(mc, q(2), 0, 1)
