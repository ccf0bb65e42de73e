"""Three-valued labelling of vertex classes by state formulas.

A verdict at a class quantifies over every concrete vertex of that class:
holds means the formula is true at all of them, fails means false at all of
them, unknown covers both genuine mixtures and the engines' honest refusals.
Boolean connectives run three-valued, which lets a decided conjunct mask an
undecided one. Probabilistic operators dispatch on the threshold: one-step
masses are exact rationals, untils with threshold 0 or 1 go to the
qualitative engines, and everything else uses certified enclosures, which
are absolute probabilities exactly for the axiom rule's classes.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Mapping

from .formulas import And, Atom, Formula, FormulaError, Next, Not, TT, Until
from .model import CanonicalVertex, Grammar, reachable_nonterminals
from .polysys import decide_threshold
from .qualitative import (
    _membership3,
    successor_table,
    until_almost_sure,
    until_positive,
)
from .quantitative import solve_until
from .validation import ProbabilityMap, canonical_vertices, full_colours

ZERO = Fraction(0)
ONE = Fraction(1)

TV = bool | None


@dataclass(frozen=True)
class Verdict:
    status: str  # "holds" | "fails" | "unknown"
    interval: tuple[Fraction, Fraction] | None = None


@dataclass
class Labelling:
    formula: Formula
    classes: list[CanonicalVertex]
    verdicts: dict[CanonicalVertex, Verdict]

    def at(self, can: CanonicalVertex) -> Verdict:
        return self.verdicts[can]


def domain(g: Grammar) -> list[CanonicalVertex]:
    names = reachable_nonterminals(g)
    return [c for c in canonical_vertices(g) if c.rule in names]


def classes_for_colours(
    g: Grammar, names: frozenset[str] | None
) -> frozenset[CanonicalVertex]:
    """Classes carrying at least one of the colours; None means all."""
    cans = domain(g)
    if names is None:
        return frozenset(cans)
    colours = full_colours(g)
    return frozenset(c for c in cans if colours[c] & names)


def _tv_to_verdict(tv: TV) -> str:
    if tv is True:
        return "holds"
    if tv is False:
        return "fails"
    return "unknown"


_QUAL_TRUE = {(">=", ZERO), ("<=", ONE)}
_QUAL_FALSE = {(">", ONE), ("<", ZERO)}


class _Evaluator:
    def __init__(self, g: Grammar, mu: ProbabilityMap, eps: Fraction):
        self.g = g
        self.mu = mu
        self.eps = eps
        self.cans = domain(g)
        self.colours = full_colours(g)
        self.colour_names = g.colour_names
        self.axiom_vertices = set(g.axiom_rule().rhs.vertices)
        self._succ = None

    def succ(self):
        if self._succ is None:
            self._succ = successor_table(self.g, self.mu)
        return self._succ

    # each eval returns {class: True | False | None}, plus per-class
    # probability intervals when the node was solved quantitatively
    def eval(self, f: Formula) -> tuple[dict[CanonicalVertex, TV], dict]:
        if isinstance(f, TT):
            return {c: True for c in self.cans}, {}
        if isinstance(f, Atom):
            return self._atom(f.name), {}
        if isinstance(f, Not):
            tv, _ = self.eval(f.sub)
            return {c: (None if v is None else not v) for c, v in tv.items()}, {}
        if isinstance(f, And):
            left, _ = self.eval(f.left)
            right, _ = self.eval(f.right)
            out: dict[CanonicalVertex, TV] = {}
            for c in self.cans:
                a, b = left[c], right[c]
                if a is False or b is False:
                    out[c] = False
                elif a is True and b is True:
                    out[c] = True
                else:
                    out[c] = None
            return out, {}
        if isinstance(f, Next):
            return self._next(f), {}
        if isinstance(f, Until):
            return self._until(f)
        raise TypeError(f)

    def _atom(self, name: str) -> dict[CanonicalVertex, TV]:
        is_colour = name in self.colour_names
        is_vertex = name in self.axiom_vertices
        if is_colour and is_vertex:
            raise FormulaError(
                f"atom {name} is both a colour and an axiom-rule vertex; rename one"
            )
        if is_colour:
            return {c: name in self.colours[c] for c in self.cans}
        if is_vertex:
            target = CanonicalVertex(self.g.axiom, name)
            return {c: c == target for c in self.cans}
        raise FormulaError(
            f"atom {name} is neither a colour ({sorted(self.colour_names)}) "
            f"nor an axiom-rule vertex ({sorted(map(str, self.axiom_vertices))})"
        )

    @staticmethod
    def _split(tv: Mapping[CanonicalVertex, TV]):
        under = frozenset(c for c, v in tv.items() if v is True)
        over = frozenset(c for c, v in tv.items() if v is not False)
        return under, over

    def _next(self, f: Next) -> dict[CanonicalVertex, TV]:
        tv, _ = self.eval(f.sub)
        under, over = self._split(tv)
        table = self.succ()
        out: dict[CanonicalVertex, TV] = {}
        for c in self.cans:
            lo = ZERO
            hi = ZERO
            for p, target in table[c]:
                if _membership3(self.g, c, target, under) is True:
                    lo += p
                    hi += p
                elif _membership3(self.g, c, target, over) is not False:
                    hi += p
            verdict = decide_threshold((lo, hi), f.cmp, f.rho)
            out[c] = True if verdict == "holds" else False if verdict == "fails" else None
        return out

    def _until(self, f: Until) -> tuple[dict[CanonicalVertex, TV], dict]:
        left, _ = self.eval(f.left)
        right, _ = self.eval(f.right)
        u1, o1 = self._split(left)
        u2, o2 = self._split(right)
        key = (f.cmp, f.rho)

        if key in _QUAL_TRUE:
            return {c: True for c in self.cans}, {}
        if key in _QUAL_FALSE:
            return {c: False for c in self.cans}, {}

        if f.rho == 0 or f.rho == 1:
            return self._until_qualitative(f, u1, o1, u2, o2), {}
        return self._until_quantitative(f, u1, o1, u2, o2)

    def _until_qualitative(self, f: Until, u1, o1, u2, o2):
        # remaining qualitative cases: > 0, <= 0, >= 1, < 1
        if f.rho == 0:
            engine = until_positive
            negated = f.cmp == "<="
        else:
            engine = until_almost_sure
            negated = f.cmp == "<"
        lower = engine(self.g, self.mu, u1, u2)
        upper = lower if (u1, u2) == (o1, o2) else engine(self.g, self.mu, o1, o2)
        out: dict[CanonicalVertex, TV] = {}
        for c in self.cans:
            if lower[c] == "holds":
                tv: TV = True
            elif upper[c] == "fails":
                tv = False
            else:
                tv = None
            if negated and tv is not None:
                tv = not tv
            out[c] = tv
        return out

    def _until_quantitative(self, f: Until, u1, o1, u2, o2):
        eps = self.eps
        exact_args = (u1, u2) == (o1, o2)
        for _ in range(3):
            lo_sol = solve_until(self.g, self.mu, u1, u2, eps=eps)
            hi_sol = lo_sol if exact_args else solve_until(self.g, self.mu, o1, o2, eps=eps)
            intervals: dict[CanonicalVertex, tuple[Fraction, Fraction]] = {}
            out: dict[CanonicalVertex, TV] = {}
            undecided_axiom = False
            for c in self.cans:
                if c.rule == self.g.axiom:
                    lo = lo_sol.class_interval(c)[0]
                    hi = hi_sol.class_interval(c)[1]
                    intervals[c] = (lo, hi)
                    verdict = decide_threshold((lo, hi), f.cmp, f.rho)
                    if verdict == "unknown" and not (lo_sol.converged and hi_sol.converged):
                        undecided_axiom = True
                    out[c] = (
                        True if verdict == "holds"
                        else False if verdict == "fails"
                        else None
                    )
                else:
                    out[c] = None
            if not undecided_axiom:
                break
            eps = eps / 4

        # deeper classes: absolute probabilities depend on the instance's
        # surroundings, but certified 0 / 1 still decide any threshold
        zero_one_needed = [c for c in self.cans if c.rule != self.g.axiom]
        if zero_one_needed:
            pos = until_positive(self.g, self.mu, o1, o2)
            one = until_almost_sure(self.g, self.mu, u1, u2)
            for c in zero_one_needed:
                if pos[c] == "fails":
                    intervals[c] = (ZERO, ZERO)
                    verdict = decide_threshold((ZERO, ZERO), f.cmp, f.rho)
                elif one[c] == "holds":
                    intervals[c] = (ONE, ONE)
                    verdict = decide_threshold((ONE, ONE), f.cmp, f.rho)
                else:
                    continue
                out[c] = (
                    True if verdict == "holds"
                    else False if verdict == "fails"
                    else None
                )
        return out, intervals


def label_formula(
    g: Grammar,
    formula: Formula,
    mu: ProbabilityMap | None = None,
    eps: Fraction = Fraction(1, 10**6),
) -> Labelling:
    mu = dict(g.mu) if mu is None else dict(mu)
    ev = _Evaluator(g, mu, eps)
    tv, intervals = ev.eval(formula)
    verdicts = {
        c: Verdict(_tv_to_verdict(tv[c]), intervals.get(c))
        for c in ev.cans
    }
    return Labelling(formula, ev.cans, verdicts)
