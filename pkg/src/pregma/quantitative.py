"""Global equation system for unbounded until, and its certified solving.

Every vertex class c gets one win variable (probability of reaching the
second objective without ever moving above c's own level) and one descend
variable per input of its context rule (probability of first leaving the
level through that input, with the objective still open). The local
first-hit rows stitch these together: staying on the level composes with the
same level's variables, moving one level down composes a child class's
descend behaviour with the vertices its copy was glued on.

For classes of the axiom rule there is no level above, so the win variable
is the absolute probability of the until objective; the CLI and the labeller
read their answers there.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .fragments import Fragment, LocalRow, NodeKey, build_fragment, local_rows
from .model import CanonicalVertex, Grammar, GrammarError, reachable_nonterminals
from .polysys import Enclosure, Key, PolySystem, solve_enclosure
from .validation import ProbabilityMap, engine_admissible

ZERO = Fraction(0)
ONE = Fraction(1)


def win_key(can: CanonicalVertex) -> Key:
    return ("win", can)


def dec_key(can: CanonicalVertex, j: int) -> Key:
    return ("dec", can, j)


def render_key(key: Key) -> str:
    if key[0] == "win":
        return f"win({key[1]})"
    return f"dec({key[1]}; {key[2]})"


@dataclass
class Assembly:
    system: PolySystem  # full system, pins not yet substituted
    pins: dict[Key, Fraction]
    fragments: dict[str, Fragment]
    rows: dict[CanonicalVertex, LocalRow]
    contexts: list[str]
    arity: dict[str, int]  # context rule -> number of inputs

    def reduced(self) -> PolySystem:
        return self.system.substitute(self.pins)


def assemble_system(
    g: Grammar,
    mu: ProbabilityMap,
    phi1: frozenset[CanonicalVertex],
    phi2: frozenset[CanonicalVertex],
) -> Assembly:
    contexts = [name for name in reachable_nonterminals(g)]
    contexts.sort(key=lambda n: (n != g.axiom, n))

    system = PolySystem()
    pins: dict[Key, Fraction] = {}
    fragments: dict[str, Fragment] = {}
    rows: dict[CanonicalVertex, LocalRow] = {}
    arity: dict[str, int] = {}

    for name in contexts:
        frag = build_fragment(g, name)
        fragments[name] = frag
        arity[name] = len(frag.rule.inputs)
        for node in frag.starts:
            can = node.can
            assert can is not None
            system.add_variable(win_key(can))
            for j in range(1, arity[name] + 1):
                system.add_variable(dec_key(can, j))
            if can in phi2:
                pins[win_key(can)] = ONE
                for j in range(1, arity[name] + 1):
                    pins[dec_key(can, j)] = ZERO
            elif can not in phi1:
                pins[win_key(can)] = ZERO
                for j in range(1, arity[name] + 1):
                    pins[dec_key(can, j)] = ZERO

    for name in contexts:
        frag = fragments[name]
        local = local_rows(g, mu, frag, phi1, phi2)
        n_inputs = arity[name]
        for node in frag.starts:
            can = node.can
            assert can is not None
            row = local[node.key]
            rows[can] = row
            if win_key(can) in pins:
                continue
            wkey = win_key(can)
            system.add_term(wkey, row.win)
            dkeys = [dec_key(can, j) for j in range(1, n_inputs + 1)]
            for j, dkey in enumerate(dkeys, start=1):
                for bkey, p in row.hits.items():
                    hit = frag.nodes[bkey]
                    if hit.kind == "input" and hit.input_index == j:
                        system.add_term(dkey, p)

            for bkey, p in row.hits.items():
                hit = frag.nodes[bkey]
                if hit.kind == "input":
                    continue
                if hit.kind in ("same", "interior"):
                    # interior hits cannot happen (interiors absorb as
                    # win/loss), so this is a same-level attachment
                    d = hit.can
                    system.add_term(wkey, p, win_key(d))
                    for j, dkey in enumerate(dkeys, start=1):
                        system.add_term(dkey, p, dec_key(d, j))
                    continue
                # child attachment: compose the child's descend behaviour
                # with whatever its copy was glued on
                e = hit.can
                o = hit.arc_index
                assert e is not None and o is not None
                system.add_term(wkey, p, win_key(e))
                child_arity = len(frag.glue[o])
                for ell in range(1, child_arity + 1):
                    base = frag.nodes[frag.glue[o][ell - 1]]
                    if base.kind == "input":
                        # descending onto a vertex the parent passed in:
                        # the walk leaves this level through that input
                        jprime = base.input_index
                        assert jprime is not None
                        if jprime <= n_inputs:
                            system.add_term(
                                dkeys[jprime - 1], p, dec_key(e, ell)
                            )
                        continue
                    target = base.can
                    assert target is not None
                    system.add_term(wkey, p, dec_key(e, ell), win_key(target))
                    for j, dkey in enumerate(dkeys, start=1):
                        system.add_term(dkey, p, dec_key(e, ell), dec_key(target, j))

    return Assembly(system, pins, fragments, rows, contexts, arity)


@dataclass
class UntilSolution:
    assembly: Assembly
    enclosure: Enclosure  # over all variables, pinned ones included exactly

    def interval(self, key: Key) -> tuple[Fraction, Fraction]:
        return self.enclosure.interval(key)

    def class_interval(self, can: CanonicalVertex) -> tuple[Fraction, Fraction]:
        return self.enclosure.interval(win_key(can))

    @property
    def converged(self) -> bool:
        return self.enclosure.converged

    @property
    def exact(self) -> bool:
        return self.enclosure.exact


def solve_until(
    g: Grammar,
    mu: ProbabilityMap,
    phi1: frozenset[CanonicalVertex],
    phi2: frozenset[CanonicalVertex],
    eps: Fraction = Fraction(1, 10**6),
    watch: list[Key] | str = "axiom",
    max_rounds: int = 20000,
) -> UntilSolution:
    """Assemble and solve. watch picks the convergence criterion: "axiom"
    tracks the axiom context's win variables (where absolute probabilities
    live), "all" tracks everything, or pass explicit keys."""
    engine_admissible(g, mu)
    assembly = assemble_system(g, mu, phi1, phi2)
    reduced = assembly.reduced()

    if watch == "axiom":
        watch = [
            win_key(node.can)
            for node in assembly.fragments[g.axiom].starts
            if node.can is not None
        ]
    elif watch == "all":
        watch = list(reduced.variables)
    reduced_watch = [k for k in watch if k in reduced.equations]

    enc = solve_enclosure(
        reduced,
        eps=eps,
        keys_of_interest=reduced_watch if reduced_watch else None,
        max_rounds=max_rounds,
    )
    lo = dict(enc.lo)
    hi = dict(enc.hi)
    for key, value in assembly.pins.items():
        lo[key] = value
        hi[key] = value
    full = Enclosure(lo, hi, enc.converged, enc.exact, enc.iterations)
    return UntilSolution(assembly, full)


def axiom_probability(
    sol: UntilSolution, g: Grammar, vertex
) -> tuple[Fraction, Fraction]:
    """Enclosure of P(until) from a named vertex of the axiom rule."""
    rule = g.axiom_rule()
    if not rule.rhs.has_vertex(vertex):
        raise GrammarError(
            f"{vertex!r} is not a vertex of the axiom rule "
            f"(known: {sorted(map(str, rule.rhs.vertices))})"
        )
    return sol.class_interval(CanonicalVertex(g.axiom, vertex))
