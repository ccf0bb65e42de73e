"""Per-class degree accounting and the probability-sum check.

A concrete vertex picks up arcs in stages: some at its creation site, then
some more each time it is glued onto the input of a deeper rule copy. The
walker below follows that chain of roles purely syntactically, so the full
out-degree (and colour set) of every vertex of the generated graph can be
read off the grammar without expanding anything.

The chain either terminates (the current role vertex lies on no nonterminal
hyperarc), revisits a role (the vertex keeps being re-glued forever, and any
arcs gained inside the loop occur infinitely often), or hits a role lying on
two or more hyperarcs, which is rejected as ambiguous.
"""
from __future__ import annotations

from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .model import CanonicalVertex, Grammar, GrammarError, Rule, VertexId, validate_grammar

ProbabilityMap = Mapping[str, Fraction]

Site = tuple[str, VertexId]


class ChainAmbiguityError(GrammarError):
    """A role vertex lies on several nonterminal hyperarcs at once."""

    def __init__(self, site: Site, count: int):
        rule, vertex = site
        super().__init__(
            f"vertex {vertex} in rule {rule} lies on {count} nonterminal hyperarcs"
        )
        self.site = site


class EngineUnsupported(GrammarError):
    """The grammar is outside what the solving engines handle."""


@dataclass(frozen=True)
class RoleChain:
    sites: tuple[Site, ...]
    cycle_start: int | None  # index into sites, None when the chain terminates

    @property
    def terminates(self) -> bool:
        return self.cycle_start is None


def _occurrences(rule: Rule, v: VertexId) -> list[tuple[str, int]]:
    """(label, 1-based position) pairs for every hyperarc slot holding v."""
    out = []
    for h in rule.rhs.hyperarcs:
        for pos, u in enumerate(h.vertices, start=1):
            if u == v:
                out.append((h.label, pos))
    return out


def role_chain(g: Grammar, rule_name: str, vertex: VertexId) -> RoleChain:
    sites: list[Site] = []
    seen: dict[Site, int] = {}
    site: Site = (rule_name, vertex)
    while True:
        if site in seen:
            return RoleChain(tuple(sites), seen[site])
        seen[site] = len(sites)
        sites.append(site)
        rule = g.rule_for(site[0])
        occs = _occurrences(rule, site[1])
        if not occs:
            return RoleChain(tuple(sites), None)
        if len(occs) > 1:
            raise ChainAmbiguityError(site, len(occs))
        label, pos = occs[0]
        child = g.rule_for(label)
        if len(child.inputs) < pos:
            raise GrammarError(f"rule {label} has no input {pos}")
        site = (label, child.inputs[pos - 1])


@dataclass(frozen=True)
class DegreeProfile:
    finite: tuple[tuple[str, int], ...]  # sorted (label, count), counts > 0
    infinite: frozenset[str]

    @property
    def is_finite(self) -> bool:
        return not self.infinite

    def count(self, label: str) -> int:
        return dict(self.finite).get(label, 0)

    def total(self, mu: ProbabilityMap) -> Fraction | None:
        """Σ μ(label) · count, or None when some label occurs infinitely."""
        if self.infinite:
            return None
        out = Fraction(0)
        for label, n in self.finite:
            if label not in mu:
                raise KeyError(label)
            out += mu[label] * n
        return out

    def __str__(self) -> str:
        parts = [f"{label}:{n}" for label, n in self.finite]
        parts += [f"{label}:inf" for label in sorted(self.infinite)]
        return "{" + ", ".join(parts) + "}"


def _site_arc_gains(g: Grammar, site: Site, direction: str) -> Counter:
    rule = g.rule_for(site[0])
    gains: Counter = Counter()
    for arc in rule.rhs.arcs:
        end = arc.source if direction == "out" else arc.target
        if end == site[1]:
            gains[arc.label] += 1
    return gains


def _profile_from_chain(g: Grammar, chain: RoleChain, direction: str) -> DegreeProfile:
    finite: Counter = Counter()
    infinite: set[str] = set()
    for idx, site in enumerate(chain.sites):
        gains = _site_arc_gains(g, site, direction)
        if chain.cycle_start is not None and idx >= chain.cycle_start:
            infinite.update(label for label, n in gains.items() if n > 0)
        else:
            finite.update(gains)
    finite_part = tuple(sorted((label, n) for label, n in finite.items() if n > 0))
    return DegreeProfile(finite_part, frozenset(infinite))


def canonical_vertices(g: Grammar) -> list[CanonicalVertex]:
    """All creation sites: the non-input vertices of every rule."""
    out = []
    for rule in g.rules:
        for v in rule.non_inputs:
            out.append(CanonicalVertex(rule.lhs, v))
    return out


def degree_profile(g: Grammar, direction: str = "out") -> dict[CanonicalVertex, DegreeProfile]:
    """Full degree profile of every canonical vertex.

    direction "out" counts arcs leaving the vertex, "in" arcs entering it.
    Raises ChainAmbiguityError on grammars where some role is ambiguous; run
    check_complete_outside first to get a readable report.
    """
    if direction not in ("out", "in"):
        raise ValueError("direction must be 'out' or 'in'")
    out: dict[CanonicalVertex, DegreeProfile] = {}
    for can in canonical_vertices(g):
        chain = role_chain(g, can.rule, can.vertex)
        out[can] = _profile_from_chain(g, chain, direction)
    return out


def full_colours(g: Grammar) -> dict[CanonicalVertex, frozenset[str]]:
    """Every colour a vertex of the given class ends up carrying."""
    out: dict[CanonicalVertex, frozenset[str]] = {}
    for can in canonical_vertices(g):
        chain = role_chain(g, can.rule, can.vertex)
        marks: set[str] = set()
        for site in chain.sites:
            rule = g.rule_for(site[0])
            marks.update(c for c, v in rule.rhs.colours if v == site[1])
        out[can] = frozenset(marks)
    return out


@dataclass(frozen=True)
class OutsideReport:
    ok: bool
    violations: tuple[str, ...]
    # inputs that also sit on a hyperarc: (rule, vertex, hyperarc label, position)
    input_as_output: tuple[tuple[str, VertexId, str, int], ...]


def check_complete_outside(g: Grammar) -> OutsideReport:
    """Each vertex may lie on at most one nonterminal hyperarc.

    Inputs that lie on a hyperarc are legal but noteworthy (the vertex keeps
    acquiring arcs after being passed back up), so they are reported
    separately rather than rejected.
    """
    violations: list[str] = []
    flagged: list[tuple[str, VertexId, str, int]] = []
    for rule in g.rules:
        for v in rule.rhs.vertices:
            occs = _occurrences(rule, v)
            if len(occs) > 1:
                violations.append(
                    f"rule {rule.lhs}: vertex {v} lies on {len(occs)} hyperarcs"
                )
            elif len(occs) == 1 and rule.is_input(v):
                label, pos = occs[0]
                flagged.append((rule.lhs, v, label, pos))
    return OutsideReport(not violations, tuple(violations), tuple(flagged))


@dataclass(frozen=True)
class PhrFailure:
    can: CanonicalVertex
    profile: DegreeProfile | None
    total: Fraction | None
    reason: str

    def __str__(self) -> str:
        bits = [f"{self.can}"]
        if self.profile is not None:
            bits.append(f"profile {self.profile}")
        if self.total is not None:
            bits.append(f"total {self.total}")
        bits.append(self.reason)
        return "; ".join(bits)


@dataclass(frozen=True)
class PhrReport:
    ok: bool
    failures: tuple[PhrFailure, ...]
    outside: OutsideReport
    checked: int

    def __str__(self) -> str:
        if self.ok:
            return f"phr_check: ok ({self.checked} vertex classes)"
        lines = [f"phr_check: FAILED ({len(self.failures)} of {self.checked} classes)"]
        lines += [f"  {f}" for f in self.failures]
        lines += [f"  {v}" for v in self.outside.violations]
        return "\n".join(lines)


def phr_check(g: Grammar, mu: ProbabilityMap | None = None) -> PhrReport:
    """Does every vertex class have total outgoing probability exactly 1?

    Sinks are allowed only when marked with a declared absorbing colour.
    Classes with an infinitely repeated outgoing arc fail for every mu.
    All arithmetic is exact.
    """
    issues = validate_grammar(g)
    if issues:
        raise GrammarError("; ".join(str(i) for i in issues))
    mu = dict(g.mu) if mu is None else dict(mu)

    outside = check_complete_outside(g)
    cans = canonical_vertices(g)
    if not outside.ok:
        return PhrReport(False, (), outside, len(cans))

    colours = full_colours(g)
    failures: list[PhrFailure] = []
    for can in cans:
        chain = role_chain(g, can.rule, can.vertex)
        profile = _profile_from_chain(g, chain, "out")
        if profile.infinite:
            failures.append(PhrFailure(can, profile, None,
                                       "arcs repeat forever, no mu can normalise this"))
            continue
        if not profile.finite:
            if colours[can] & g.absorbing:
                continue
            failures.append(PhrFailure(can, profile, Fraction(0),
                                       "sink without an absorbing colour"))
            continue
        missing = [label for label, _ in profile.finite if label not in mu]
        if missing:
            failures.append(PhrFailure(can, profile, None,
                                       f"no probability for {', '.join(missing)}"))
            continue
        total = profile.total(mu)
        if total != 1:
            failures.append(PhrFailure(can, profile, total, "total is not 1"))
    return PhrReport(not failures, tuple(failures), outside, len(cans))


def absorbing_classes(g: Grammar) -> frozenset[CanonicalVertex]:
    """Classes that are deliberate sinks: no outgoing arcs ever, marked."""
    colours = full_colours(g)
    out = set()
    for can in canonical_vertices(g):
        chain = role_chain(g, can.rule, can.vertex)
        profile = _profile_from_chain(g, chain, "out")
        if not profile.finite and not profile.infinite and colours[can] & g.absorbing:
            out.add(can)
    return frozenset(out)


def engine_admissible(g: Grammar, mu: ProbabilityMap | None = None) -> PhrReport:
    """Gate for the solving engines; raises EngineUnsupported when the local
    fragment picture breaks down.

    Beyond phr_check this refuses (a) classes whose incoming arcs repeat
    forever and (b) inputs lying on a hyperarc whose onward chain still gains
    outgoing arcs: in both cases a vertex's one-step behaviour would depend
    on levels above the fragment under consideration.
    """
    report = phr_check(g, mu)
    if not report.ok:
        raise EngineUnsupported(str(report))
    for can, profile in degree_profile(g, "in").items():
        if profile.infinite:
            raise EngineUnsupported(
                f"{can}: incoming arcs {sorted(profile.infinite)} repeat forever"
            )
    for rule_name, vertex, label, pos in check_complete_outside(g).input_as_output:
        child = g.rule_for(label)
        chain = role_chain(g, label, child.inputs[pos - 1])
        onward = _profile_from_chain(g, chain, "out")
        if onward.finite or onward.infinite:
            raise EngineUnsupported(
                f"rule {rule_name}: input {vertex} keeps gaining arcs "
                f"after being passed to {label} at position {pos}"
            )
    return report
