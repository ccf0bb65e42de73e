"""Core model: ranked symbols, hypergraphs, rules, deterministic rewriting.

A grammar here carries exactly one rule per nonterminal, so rewriting a graph
is deterministic: every nonterminal hyperarc is replaced simultaneously, the
terminal part only ever grows, and each concrete vertex can be traced back to
the rule vertex that created it (its canonical vertex) and to the rewriting
round that created it (its level).
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Callable, NamedTuple

VertexId = Any


class GrammarError(ValueError):
    """An operation was handed a grammar (or graph) it cannot work with."""


class Arc(NamedTuple):
    label: str
    source: VertexId
    target: VertexId


class ColourMark(NamedTuple):
    colour: str
    vertex: VertexId


class Hyperarc(NamedTuple):
    label: str
    vertices: tuple[VertexId, ...]


class RankedSymbol(NamedTuple):
    name: str
    arity: int
    terminal: bool


@dataclass(frozen=True)
class CanonicalVertex:
    """Creation site of a concrete vertex: a non-input vertex of one rule.

    Two concrete vertices with the same canonical vertex are indistinguishable
    locally (same out-arc labels, same colours) although their surroundings
    above their own level may differ.
    """

    rule: str
    vertex: VertexId

    def __str__(self) -> str:
        return f"{self.rule}:{self.vertex}"


@dataclass(frozen=True)
class ConcreteVertex:
    id: VertexId
    level: int
    can: CanonicalVertex


@dataclass
class Hypergraph:
    """Vertices, labelled binary arcs, colour marks, nonterminal hyperarcs."""

    vertices: list[VertexId] = field(default_factory=list)
    arcs: list[Arc] = field(default_factory=list)
    colours: list[ColourMark] = field(default_factory=list)
    hyperarcs: list[Hyperarc] = field(default_factory=list)

    def __post_init__(self) -> None:
        self._vset = set(self.vertices)
        if len(self._vset) != len(self.vertices):
            raise GrammarError("repeated vertex in hypergraph")

    def add_vertex(self, v: VertexId) -> None:
        if v in self._vset:
            raise GrammarError(f"vertex {v!r} already present")
        self.vertices.append(v)
        self._vset.add(v)

    def has_vertex(self, v: VertexId) -> bool:
        return v in self._vset

    def add_arc(self, label: str, source: VertexId, target: VertexId) -> None:
        self.arcs.append(Arc(label, source, target))

    def add_colour(self, colour: str, vertex: VertexId) -> None:
        self.colours.append(ColourMark(colour, vertex))

    def add_hyperarc(self, label: str, vertices: tuple[VertexId, ...]) -> None:
        self.hyperarcs.append(Hyperarc(label, tuple(vertices)))

    def colour_sets(self) -> dict[VertexId, frozenset[str]]:
        out: dict[VertexId, set[str]] = {v: set() for v in self.vertices}
        for colour, v in self.colours:
            out.setdefault(v, set()).add(colour)
        return {v: frozenset(cs) for v, cs in out.items()}

    def out_arcs(self) -> dict[VertexId, list[Arc]]:
        out: dict[VertexId, list[Arc]] = {v: [] for v in self.vertices}
        for arc in self.arcs:
            out.setdefault(arc.source, []).append(arc)
        return out

    def in_arcs(self) -> dict[VertexId, list[Arc]]:
        out: dict[VertexId, list[Arc]] = {v: [] for v in self.vertices}
        for arc in self.arcs:
            out.setdefault(arc.target, []).append(arc)
        return out

    def terminal_part(self) -> "Hypergraph":
        return Hypergraph(
            vertices=list(self.vertices),
            arcs=list(self.arcs),
            colours=list(self.colours),
            hyperarcs=[],
        )

    def copy(self) -> "Hypergraph":
        return Hypergraph(
            vertices=list(self.vertices),
            arcs=list(self.arcs),
            colours=list(self.colours),
            hyperarcs=list(self.hyperarcs),
        )


@dataclass
class Rule:
    lhs: str
    inputs: tuple[VertexId, ...]
    rhs: Hypergraph

    @property
    def non_inputs(self) -> list[VertexId]:
        iset = set(self.inputs)
        return [v for v in self.rhs.vertices if v not in iset]

    def is_input(self, v: VertexId) -> bool:
        return v in self.inputs

    def input_index(self, v: VertexId) -> int:
        """1-based position of an input vertex."""
        return self.inputs.index(v) + 1


@dataclass
class Grammar:
    terminals: dict[str, int]
    nonterminals: dict[str, int]
    axiom: str
    rules: list[Rule] = field(default_factory=list)
    mu: dict[str, Fraction] = field(default_factory=dict)
    absorbing: set[str] = field(default_factory=set)

    @property
    def colour_names(self) -> frozenset[str]:
        return frozenset(n for n, k in self.terminals.items() if k == 1)

    @property
    def arc_labels(self) -> frozenset[str]:
        return frozenset(n for n, k in self.terminals.items() if k == 2)

    @property
    def rule_map(self) -> dict[str, Rule]:
        out: dict[str, Rule] = {}
        for rule in self.rules:
            out.setdefault(rule.lhs, rule)
        return out

    def rule_for(self, name: str) -> Rule:
        for rule in self.rules:
            if rule.lhs == name:
                return rule
        raise GrammarError(f"no rule for nonterminal {name!r}")

    def symbol(self, name: str) -> RankedSymbol:
        if name in self.terminals:
            return RankedSymbol(name, self.terminals[name], True)
        if name in self.nonterminals:
            return RankedSymbol(name, self.nonterminals[name], False)
        raise GrammarError(f"unknown symbol {name!r}")

    def axiom_rule(self) -> Rule:
        return self.rule_for(self.axiom)


@dataclass(frozen=True)
class Issue:
    code: str
    detail: str

    def __str__(self) -> str:
        return f"{self.code}: {self.detail}"


def validate_grammar(g: Grammar) -> list[Issue]:
    """Structural well-formedness check. Empty result means valid.

    Covers: symbol declarations and arities, exactly one rule per nonterminal,
    axiom of arity 0, injective input tuples, pairwise distinct vertices on
    every nonterminal hyperarc, dangling references, and probability ranges.
    """
    issues: list[Issue] = []
    add = issues.append

    overlap = set(g.terminals) & set(g.nonterminals)
    for name in sorted(overlap):
        add(Issue("symbol-overlap", f"{name} declared both terminal and nonterminal"))

    if g.axiom not in g.nonterminals:
        add(Issue("axiom-undeclared", f"axiom {g.axiom} is not a declared nonterminal"))
    elif g.nonterminals[g.axiom] != 0:
        add(Issue("axiom-arity", f"axiom {g.axiom} must have arity 0, has {g.nonterminals[g.axiom]}"))

    seen_lhs: set[str] = set()
    for rule in g.rules:
        if rule.lhs in seen_lhs:
            add(Issue("duplicate-rule", f"second rule for {rule.lhs}"))
        seen_lhs.add(rule.lhs)
    for name in sorted(g.nonterminals):
        if name not in seen_lhs:
            add(Issue("missing-rule", f"nonterminal {name} has no rule"))

    for rule in g.rules:
        where = f"rule {rule.lhs}"
        if rule.lhs not in g.nonterminals:
            add(Issue("rule-lhs", f"{where}: undeclared nonterminal"))
        else:
            arity = g.nonterminals[rule.lhs]
            if len(rule.inputs) != arity:
                add(Issue("input-count", f"{where}: {len(rule.inputs)} inputs, arity is {arity}"))
        if len(set(rule.inputs)) != len(rule.inputs):
            add(Issue("input-repeat", f"{where}: repeated input vertex"))
        for v in rule.inputs:
            if not rule.rhs.has_vertex(v):
                add(Issue("input-unknown", f"{where}: input {v} not a rhs vertex"))
        for arc in rule.rhs.arcs:
            if g.terminals.get(arc.label) != 2:
                add(Issue("arc-label", f"{where}: {arc.label} is not an arity-2 terminal"))
            for end in (arc.source, arc.target):
                if not rule.rhs.has_vertex(end):
                    add(Issue("arc-endpoint", f"{where}: arc {arc.label} touches unknown vertex {end}"))
        for colour, v in rule.rhs.colours:
            if g.terminals.get(colour) != 1:
                add(Issue("colour-label", f"{where}: {colour} is not a declared colour"))
            if not rule.rhs.has_vertex(v):
                add(Issue("colour-vertex", f"{where}: colour {colour} on unknown vertex {v}"))
        for h in rule.rhs.hyperarcs:
            if h.label not in g.nonterminals:
                add(Issue("hyperarc-label", f"{where}: {h.label} is not a nonterminal"))
            elif len(h.vertices) != g.nonterminals[h.label]:
                add(Issue("hyperarc-arity", f"{where}: {h.label} hyperarc has {len(h.vertices)} vertices, arity is {g.nonterminals[h.label]}"))
            if len(set(h.vertices)) != len(h.vertices):
                add(Issue("hyperarc-repeat", f"{where}: hyperarc {h.label} repeats a vertex"))
            for v in h.vertices:
                if not rule.rhs.has_vertex(v):
                    add(Issue("hyperarc-vertex", f"{where}: hyperarc {h.label} touches unknown vertex {v}"))

    for label, p in g.mu.items():
        if g.terminals.get(label) != 2:
            add(Issue("prob-label", f"probability for {label}, which is not an arity-2 terminal"))
        if not (0 < p <= 1):
            add(Issue("prob-range", f"probability {p} for {label} outside (0, 1]"))

    for colour in sorted(g.absorbing):
        if g.terminals.get(colour) != 1:
            add(Issue("absorbing-label", f"absorbing {colour} is not a declared colour"))

    return issues


def succ_nonterminals(g: Grammar) -> dict[str, frozenset[str]]:
    """Nonterminal labels occurring on the right-hand side of each rule."""
    return {
        rule.lhs: frozenset(h.label for h in rule.rhs.hyperarcs)
        for rule in g.rules
    }


def reachable_nonterminals(g: Grammar) -> frozenset[str]:
    succ = succ_nonterminals(g)
    seen = {g.axiom}
    todo = [g.axiom]
    while todo:
        here = todo.pop()
        for nxt in succ.get(here, frozenset()):
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return frozenset(seen)


def _default_fresh() -> Callable[[], int]:
    counter = itertools.count()
    return lambda: next(counter)


def _instantiate(
    rule: Rule,
    glue: dict[VertexId, VertexId],
    fresh: Callable[[], VertexId],
) -> tuple[dict[VertexId, VertexId], list[VertexId]]:
    """Map rule vertices to concrete ones: inputs via glue, the rest fresh."""
    mapping = dict(glue)
    created: list[VertexId] = []
    for v in rule.rhs.vertices:
        if v not in mapping:
            cid = fresh()
            mapping[v] = cid
            created.append(cid)
    return mapping, created


def rewrite_one(
    g: Grammar,
    graph: Hypergraph,
    index: int = 0,
    fresh: Callable[[], VertexId] | None = None,
) -> Hypergraph:
    """Replace the nonterminal hyperarc at `index` by its rule's rhs."""
    if not (0 <= index < len(graph.hyperarcs)):
        raise GrammarError(f"no hyperarc at index {index}")
    fresh = fresh or _default_fresh()
    target = graph.hyperarcs[index]
    rule = g.rule_for(target.label)
    if len(rule.inputs) != len(target.vertices):
        raise GrammarError(f"hyperarc {target.label} arity mismatch")
    out = graph.copy()
    out.hyperarcs = [h for i, h in enumerate(graph.hyperarcs) if i != index]
    mapping, created = _instantiate(rule, dict(zip(rule.inputs, target.vertices)), fresh)
    for cid in created:
        out.add_vertex(cid)
    for arc in rule.rhs.arcs:
        out.add_arc(arc.label, mapping[arc.source], mapping[arc.target])
    for colour, v in rule.rhs.colours:
        out.add_colour(colour, mapping[v])
    for h in rule.rhs.hyperarcs:
        out.add_hyperarc(h.label, tuple(mapping[v] for v in h.vertices))
    return out


def parallel_rewrite(
    g: Grammar,
    graph: Hypergraph,
    fresh: Callable[[], VertexId] | None = None,
) -> Hypergraph:
    """Replace every nonterminal hyperarc simultaneously (one full round)."""
    fresh = fresh or _default_fresh()
    out = graph.copy()
    out.hyperarcs = []
    for target in graph.hyperarcs:
        rule = g.rule_for(target.label)
        if len(rule.inputs) != len(target.vertices):
            raise GrammarError(f"hyperarc {target.label} arity mismatch")
        mapping, created = _instantiate(rule, dict(zip(rule.inputs, target.vertices)), fresh)
        for cid in created:
            out.add_vertex(cid)
        for arc in rule.rhs.arcs:
            out.add_arc(arc.label, mapping[arc.source], mapping[arc.target])
        for colour, v in rule.rhs.colours:
            out.add_colour(colour, mapping[v])
        for h in rule.rhs.hyperarcs:
            out.add_hyperarc(h.label, tuple(mapping[v] for v in h.vertices))
    return out


@dataclass
class Instance:
    """One rule application during an expansion.

    via_index is the position of the replaced hyperarc within the parent
    instance's rule rhs (None for the axiom instance); it identifies which
    occurrence was rewritten even when several share a label.
    """

    index: int
    rule: str
    level: int
    parent: int | None
    via_index: int | None
    mapping: dict[VertexId, VertexId]


@dataclass
class Expansion:
    grammar: Grammar
    depth: int
    graph: Hypergraph
    vertices: dict[VertexId, ConcreteVertex]
    instances: list[Instance]
    frontier: frozenset[VertexId]

    def axiom_vertex(self, name: VertexId) -> VertexId:
        mapping = self.instances[0].mapping
        if name not in mapping:
            raise GrammarError(
                f"{name!r} is not a vertex of the axiom rule "
                f"(known: {sorted(map(str, mapping))})"
            )
        return mapping[name]


def expand(
    g: Grammar,
    depth: int,
    fresh: Callable[[], VertexId] | None = None,
) -> Expansion:
    """Apply `depth` rounds of parallel rewriting starting from the axiom.

    Returns the resulting graph (remaining hyperarcs included) together with
    per-vertex levels and canonical vertices, the full instance table, and the
    frontier: vertices that still lie on an unexpanded hyperarc, whose
    out-neighbourhood is therefore not final yet.
    """
    if depth < 0:
        raise GrammarError("depth must be >= 0")
    fresh = fresh or _default_fresh()
    axiom_rule = g.axiom_rule()
    if axiom_rule.inputs:
        raise GrammarError("axiom rule must have no inputs")

    graph = Hypergraph()
    vertices: dict[VertexId, ConcreteVertex] = {}
    instances: list[Instance] = []
    # pending: (hyperarc with concrete vertices, owner instance, index in owner's rule rhs)
    pending: list[tuple[Hyperarc, int, int]] = []

    def apply_rule(rule: Rule, glue: dict[VertexId, VertexId],
                   level: int, parent: int | None, via_index: int | None) -> None:
        mapping, _ = _instantiate(rule, glue, fresh)
        inst = Instance(len(instances), rule.lhs, level, parent, via_index, mapping)
        instances.append(inst)
        for rv, cid in ((rv, mapping[rv]) for rv in rule.rhs.vertices):
            if cid in vertices:
                continue
            graph.add_vertex(cid)
            vertices[cid] = ConcreteVertex(cid, level, CanonicalVertex(rule.lhs, rv))
        for arc in rule.rhs.arcs:
            graph.add_arc(arc.label, mapping[arc.source], mapping[arc.target])
        for colour, v in rule.rhs.colours:
            graph.add_colour(colour, mapping[v])
        for hi, h in enumerate(rule.rhs.hyperarcs):
            concrete = Hyperarc(h.label, tuple(mapping[v] for v in h.vertices))
            pending.append((concrete, inst.index, hi))

    apply_rule(axiom_rule, {}, 0, None, None)
    for level in range(1, depth + 1):
        batch, pending = pending, []
        for concrete, owner, via_index in batch:
            rule = g.rule_for(concrete.label)
            if len(rule.inputs) != len(concrete.vertices):
                raise GrammarError(f"hyperarc {concrete.label} arity mismatch")
            glue = dict(zip(rule.inputs, concrete.vertices))
            apply_rule(rule, glue, level, owner, via_index)

    graph.hyperarcs = [concrete for concrete, _, _ in pending]
    frontier = frozenset(v for h in graph.hyperarcs for v in h.vertices)
    return Expansion(g, depth, graph, vertices, instances, frontier)


def component_ids(expansion: Expansion, start: VertexId) -> frozenset[VertexId]:
    """Vertices connected to `start` by terminal arcs, ignoring direction."""
    if start not in expansion.vertices:
        raise GrammarError(f"unknown vertex id {start!r}")
    adj: dict[VertexId, set[VertexId]] = {v: set() for v in expansion.graph.vertices}
    for arc in expansion.graph.arcs:
        adj[arc.source].add(arc.target)
        adj[arc.target].add(arc.source)
    seen = {start}
    todo = [start]
    while todo:
        here = todo.pop()
        for nxt in adj[here]:
            if nxt not in seen:
                seen.add(nxt)
                todo.append(nxt)
    return frozenset(seen)


def reachable_component(
    g: Grammar,
    start: VertexId,
    depth: int,
) -> tuple[Hypergraph, dict[VertexId, ConcreteVertex]]:
    """Terminal part of the depth-`depth` expansion restricted to the
    undirected component of the axiom-rule vertex named `start`."""
    expansion = expand(g, depth)
    sid = expansion.axiom_vertex(start)
    ids = component_ids(expansion, sid)
    sub = Hypergraph()
    for v in expansion.graph.vertices:
        if v in ids:
            sub.add_vertex(v)
    for arc in expansion.graph.arcs:
        if arc.source in ids and arc.target in ids:
            sub.arcs.append(arc)
    for colour, v in expansion.graph.colours:
        if v in ids:
            sub.colours.append(ColourMark(colour, v))
    return sub, {v: cv for v, cv in expansion.vertices.items() if v in ids}
