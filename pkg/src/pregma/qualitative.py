"""Qualitative verdicts per vertex class: positive probability, probability
one, and exact one-step mass.

Class-level answers here mean "for every concrete vertex of this class".
Where a property genuinely depends on the surroundings above a vertex's
level, the verdict degrades to unknown rather than guessing; each decided
answer is backed either by exact rational arithmetic or by a certified
enclosure from the quantitative solver.

The recurring subtlety is descending through an input: which vertex the walk
lands on depends on where the class's context rule was instantiated. The
resolver below enumerates the possible landing sites; "for all occurrences"
arguments then give sound universal verdicts, "for some occurrence" sound
existential ones.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Mapping

from .model import CanonicalVertex, Grammar, GrammarError, reachable_nonterminals
from .polysys import decide_threshold
from .quantitative import (
    UntilSolution,
    assemble_system,
    dec_key,
    solve_until,
    win_key,
)
from .validation import (
    ProbabilityMap,
    absorbing_classes,
    canonical_vertices,
    engine_admissible,
    role_chain,
)

ZERO = Fraction(0)
ONE = Fraction(1)

SELF = ("self",)

# a successor target: a class, ("ref", rule, j) for "whatever the context's
# parent glued onto input j", or SELF for an absorbing sink's self-loop
Target = object
Ref = tuple[str, str, int]


def _reachable_rules(g: Grammar):
    names = reachable_nonterminals(g)
    return [r for r in g.rules if r.lhs in names]


def resolve_ref(g: Grammar, rule_name: str, j: int) -> frozenset[CanonicalVertex]:
    """All classes that can sit at input j of rule_name across occurrences."""
    rules = _reachable_rules(g)
    out: set[CanonicalVertex] = set()
    seen: set[tuple[str, int]] = set()
    todo = [(rule_name, j)]
    while todo:
        name, pos = todo.pop()
        if (name, pos) in seen:
            continue
        seen.add((name, pos))
        for host in rules:
            for h in host.rhs.hyperarcs:
                if h.label != name:
                    continue
                v = h.vertices[pos - 1]
                if host.is_input(v):
                    todo.append((host.lhs, host.input_index(v)))
                else:
                    out.add(CanonicalVertex(host.lhs, v))
    return frozenset(out)


def successor_table(
    g: Grammar, mu: ProbabilityMap
) -> dict[CanonicalVertex, list[tuple[Fraction, Target]]]:
    """One-step successors of each class, with exact probabilities.

    Walks the full role chain, so arcs gained at later gluings are included.
    An arc into an input of the chain's current rule resolves through the
    hyperarc occurrence the chain arrived by, which pins the target down to a
    class of the previous rule (or, at the chain's first site, leaves a ref
    to the context's own parent). Absorbing sinks get a self-loop.
    """
    sinks = absorbing_classes(g)
    table: dict[CanonicalVertex, list[tuple[Fraction, Target]]] = {}
    for can in canonical_vertices(g):
        succs: list[tuple[Fraction, Target]] = []
        chain = role_chain(g, can.rule, can.vertex)
        prev_rule = None
        prev_arc = None  # hyperarc occurrence the chain moved through
        for site_rule_name, site_vertex in chain.sites:
            rule = g.rule_for(site_rule_name)
            for arc in rule.rhs.arcs:
                if arc.source != site_vertex:
                    continue
                if arc.label not in mu:
                    raise GrammarError(f"no probability for arc label {arc.label}")
                p = mu[arc.label]
                x = arc.target
                if not rule.is_input(x):
                    succs.append((p, CanonicalVertex(site_rule_name, x)))
                    continue
                k = rule.input_index(x)
                if prev_rule is None:
                    succs.append((p, ("ref", site_rule_name, k)))
                else:
                    z = prev_arc.vertices[k - 1]
                    if prev_rule.is_input(z):
                        succs.append(
                            (p, ("ref", prev_rule.lhs, prev_rule.input_index(z)))
                        )
                    else:
                        succs.append((p, CanonicalVertex(prev_rule.lhs, z)))
            # move one gluing deeper for the next site
            occ = None
            for h in rule.rhs.hyperarcs:
                if site_vertex in h.vertices:
                    occ = h
            prev_rule, prev_arc = rule, occ
        if not succs and can in sinks:
            succs.append((ONE, SELF))
        table[can] = succs
    return table


def _membership3(
    g: Grammar,
    can: CanonicalVertex,
    target: Target,
    inside: frozenset[CanonicalVertex],
) -> bool | None:
    if target == SELF:
        return can in inside
    if isinstance(target, CanonicalVertex):
        return target in inside
    _, rule_name, j = target
    sites = resolve_ref(g, rule_name, j)
    if sites <= inside:
        return True
    if not (sites & inside):
        return False
    return None


def next_qualitative(
    g: Grammar,
    mu: ProbabilityMap,
    targets: frozenset[CanonicalVertex],
    cmp: str,
    rho: Fraction,
) -> dict[CanonicalVertex, str]:
    """Per-class verdict for: one step lands in `targets` with mass cmp rho.

    One-step mass is a single exact rational per class, so any threshold is
    decidable here up to ref targets whose occurrences disagree."""
    engine_admissible(g, mu)
    table = successor_table(g, mu)
    out: dict[CanonicalVertex, str] = {}
    for can, succs in table.items():
        mass_lo = ZERO
        mass_hi = ZERO
        for p, target in succs:
            member = _membership3(g, can, target, targets)
            if member is True:
                mass_lo += p
                mass_hi += p
            elif member is None:
                mass_hi += p
        out[can] = decide_threshold((mass_lo, mass_hi), cmp, rho)
    return out


@dataclass
class PositivityTables:
    win_plus: frozenset[CanonicalVertex]
    dec_plus: dict[CanonicalVertex, frozenset[int]]


def _positivity(g: Grammar, mu: ProbabilityMap,
                phi1: frozenset[CanonicalVertex],
                phi2: frozenset[CanonicalVertex]) -> PositivityTables:
    assembly = assemble_system(g, mu, phi1, phi2)
    positive = set(assembly.reduced().positive_variables())
    positive |= {k for k, v in assembly.pins.items() if v > 0}
    win_plus = set()
    dec_plus: dict[CanonicalVertex, set[int]] = {}
    for key in assembly.system.variables:
        if key not in positive:
            continue
        if key[0] == "win":
            win_plus.add(key[1])
        else:
            dec_plus.setdefault(key[1], set()).add(key[2])
    return PositivityTables(
        frozenset(win_plus),
        {c: frozenset(js) for c, js in dec_plus.items()},
    )


def _occurrences_of(g: Grammar, name: str):
    for host in _reachable_rules(g):
        for h in host.rhs.hyperarcs:
            if h.label == name:
                yield host, h


def until_positive(
    g: Grammar,
    mu: ProbabilityMap,
    phi1: frozenset[CanonicalVertex],
    phi2: frozenset[CanonicalVertex],
) -> dict[CanonicalVertex, str]:
    """Is P(phi1 until phi2) positive: holds (for every instance), fails (for
    none), or unknown.

    The existential side is exact reachability. The universal side certifies
    "no instance can fail" through a least fixpoint of failure witnesses:
    a class can fail only by having no winning mass on its own level and
    some occurrence whose every reachable input continues a failure. That
    argument is inductive over a concrete ancestry, which always bottoms out
    at the axiom, so missing witnesses really do mean "always positive".
    """
    engine_admissible(g, mu)
    pos = _positivity(g, mu, phi1, phi2)

    cans = canonical_vertices(g)
    reachable = {c for c in cans if c.rule in reachable_nonterminals(g)}

    # existential reachability of positive probability, refs resolved by "some"
    may: set[CanonicalVertex] = set()
    may_ref: set[tuple[str, int]] = set()
    changed = True
    while changed:
        changed = False
        for c in reachable:
            if c in may:
                continue
            hit = c in pos.win_plus
            for j in pos.dec_plus.get(c, frozenset()):
                if (c.rule, j) in may_ref:
                    hit = True
            if hit:
                may.add(c)
                changed = True
        for name in {c.rule for c in reachable}:
            rule = g.rule_for(name)
            for j in range(1, len(rule.inputs) + 1):
                if (name, j) in may_ref:
                    continue
                found = False
                for host, h in _occurrences_of(g, name):
                    v = h.vertices[j - 1]
                    if host.is_input(v):
                        if (host.lhs, host.input_index(v)) in may_ref:
                            found = True
                    elif CanonicalVertex(host.lhs, v) in may:
                        found = True
                if found:
                    may_ref.add((name, j))
                    changed = True

    # failure witnesses: least fixpoint, refs resolved per occurrence
    bad: set[CanonicalVertex] = set()
    bad_ref: set[tuple[str, int]] = set()

    def site_bad(host, h, j: int) -> bool:
        v = h.vertices[j - 1]
        if host.is_input(v):
            return (host.lhs, host.input_index(v)) in bad_ref
        return CanonicalVertex(host.lhs, v) in bad

    changed = True
    while changed:
        changed = False
        for c in reachable:
            if c in bad:
                continue
            if c in phi2:
                continue
            if c not in phi1:
                bad.add(c)
                changed = True
                continue
            if c in pos.win_plus:
                continue
            js = pos.dec_plus.get(c, frozenset())
            if not js:
                bad.add(c)
                changed = True
                continue
            for host, h in _occurrences_of(g, c.rule):
                if all(site_bad(host, h, j) for j in js):
                    bad.add(c)
                    changed = True
                    break
        for name in {c.rule for c in reachable}:
            rule = g.rule_for(name)
            for j in range(1, len(rule.inputs) + 1):
                if (name, j) in bad_ref:
                    continue
                for host, h in _occurrences_of(g, name):
                    if site_bad(host, h, j):
                        bad_ref.add((name, j))
                        changed = True
                        break

    out: dict[CanonicalVertex, str] = {}
    for c in reachable:
        if c in phi2:
            out[c] = "holds"
        elif c not in phi1:
            out[c] = "fails"
        elif c not in may:
            out[c] = "fails"
        elif c not in bad:
            out[c] = "holds"
        else:
            out[c] = "unknown"
    return out


def until_almost_sure(
    g: Grammar,
    mu: ProbabilityMap,
    phi1: frozenset[CanonicalVertex],
    phi2: frozenset[CanonicalVertex],
    eps: Fraction = Fraction(1, 10**9),
    max_rounds: int = 4000,
) -> dict[CanonicalVertex, str]:
    """Is P(phi1 until phi2) equal to one: holds / fails / unknown per class.

    A class joins the certified-one set when its winning and descending mass
    provably sums to one and every possible landing site of every positive
    descend direction is already certified. Symmetrically, a class leaves the
    candidate set when its mass sum is provably below one or some positive
    descend direction lands only outside the candidates. In the gap (for
    example mass one in the limit but never certified) the answer stays
    unknown.
    """
    sol = solve_until(g, mu, phi1, phi2, eps=eps, watch="all", max_rounds=max_rounds)
    pos = _positivity(g, mu, phi1, phi2)
    enc = sol.enclosure

    cans = [c for c in canonical_vertices(g)
            if c.rule in reachable_nonterminals(g)]

    def scalar3(c: CanonicalVertex) -> str:
        js = pos.dec_plus.get(c, frozenset())
        lo = enc.lo[win_key(c)] + sum((enc.lo[dec_key(c, j)] for j in js), ZERO)
        hi = (enc.hi[win_key(c)] if c in pos.win_plus else ZERO) + sum(
            (enc.hi[dec_key(c, j)] for j in js), ZERO
        )
        if lo >= 1:
            return "one"
        if hi < 1:
            return "less"
        return "unk"

    scalars = {c: scalar3(c) for c in cans}
    refs = {
        (c, j): resolve_ref(g, c.rule, j)
        for c in cans
        for j in pos.dec_plus.get(c, frozenset())
    }

    certain: set[CanonicalVertex] = set()
    changed = True
    while changed:
        changed = False
        for c in cans:
            if c in certain or scalars[c] != "one":
                continue
            if all(refs[(c, j)] <= certain for j in pos.dec_plus.get(c, frozenset())):
                certain.add(c)
                changed = True

    candidates: set[CanonicalVertex] = set(cans)
    changed = True
    while changed:
        changed = False
        for c in list(candidates):
            if scalars[c] == "less":
                candidates.discard(c)
                changed = True
                continue
            for j in pos.dec_plus.get(c, frozenset()):
                sites = refs[(c, j)]
                if sites and not (sites & candidates):
                    candidates.discard(c)
                    changed = True
                    break

    out: dict[CanonicalVertex, str] = {}
    for c in cans:
        if c in certain:
            out[c] = "holds"
        elif c not in candidates:
            out[c] = "fails"
        else:
            out[c] = "unknown"
    return out
