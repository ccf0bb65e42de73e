"""Text format for grammars, plus dot output.

The format is line-based:

    # comment
    nonterminal NAME ARITY
    terminal NAME ARITY
    colour NAME              # shorthand for an arity-1 terminal
    prob LABEL P             # P is an integer or p/q
    axiom NAME
    default-colour NAME      # attach NAME to every rhs vertex (see nocolour)
    absorbing NAME           # colour marking deliberate sinks

    rule NAME inputs v1 v2
      vertex u w             # optional, declares vertices up front
      arc LABEL SRC DST
      hyperarc NAME v1 v2
      colour NAME v
      nocolour NAME v        # suppress the default colour on v

A rule block ends at a blank line or at the next top-level keyword. The
default colour is applied at parse time, so parsed grammars always carry
explicit colour marks; serialisation writes them back out explicitly.
"""
from __future__ import annotations

from fractions import Fraction

from .model import (
    Arc,
    ColourMark,
    ConcreteVertex,
    Grammar,
    Hyperarc,
    Hypergraph,
    Rule,
    VertexId,
)

_TOP_KEYWORDS = {
    "nonterminal", "terminal", "colour", "prob", "axiom",
    "default-colour", "absorbing", "rule",
}
_RULE_KEYWORDS = {"vertex", "arc", "hyperarc", "colour", "nocolour"}


class ParseError(ValueError):
    def __init__(self, lineno: int, message: str):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class _RuleDraft:
    def __init__(self, lineno: int, name: str, inputs: tuple[str, ...]):
        self.lineno = lineno
        self.name = name
        self.inputs = inputs
        self.order: list[str] = []
        self._seen: set[str] = set()
        self.arcs: list[Arc] = []
        self.colours: list[ColourMark] = []
        self.hyperarcs: list[Hyperarc] = []
        self.suppressed: set[tuple[str, str]] = set()
        for v in inputs:
            self.touch(v)

    def touch(self, v: str) -> None:
        if v not in self._seen:
            self._seen.add(v)
            self.order.append(v)


def _fraction(lineno: int, text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(lineno, f"bad probability {text!r}: {exc}") from None


def parse_grammar(text: str) -> Grammar:
    terminals: dict[str, int] = {}
    nonterminals: dict[str, int] = {}
    mu: dict[str, Fraction] = {}
    absorbing: set[str] = set()
    axiom: str | None = None
    default_colour: str | None = None
    drafts: list[_RuleDraft] = []
    current: _RuleDraft | None = None

    def declare(lineno: int, table: dict[str, int], name: str, arity: int) -> None:
        if name in terminals or name in nonterminals:
            raise ParseError(lineno, f"symbol {name} declared twice")
        if arity < 0:
            raise ParseError(lineno, f"negative arity for {name}")
        table[name] = arity

    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            if not raw.strip():
                current = None
            continue
        parts = line.split()
        head, args = parts[0], parts[1:]

        if current is not None and head in _RULE_KEYWORDS and not (
            head == "colour" and len(args) == 1
        ):
            if head == "vertex":
                if not args:
                    raise ParseError(lineno, "vertex line needs at least one name")
                for v in args:
                    current.touch(v)
            elif head == "arc":
                if len(args) != 3:
                    raise ParseError(lineno, "arc needs LABEL SRC DST")
                label, src, dst = args
                current.touch(src)
                current.touch(dst)
                current.arcs.append(Arc(label, src, dst))
            elif head == "hyperarc":
                if len(args) < 1:
                    raise ParseError(lineno, "hyperarc needs a label")
                label, vs = args[0], args[1:]
                for v in vs:
                    current.touch(v)
                current.hyperarcs.append(Hyperarc(label, tuple(vs)))
            elif head == "colour":
                if len(args) != 2:
                    raise ParseError(lineno, "colour inside a rule needs NAME VERTEX")
                name, v = args
                current.touch(v)
                current.colours.append(ColourMark(name, v))
            elif head == "nocolour":
                if len(args) != 2:
                    raise ParseError(lineno, "nocolour needs NAME VERTEX")
                name, v = args
                if default_colour is None:
                    raise ParseError(lineno, "nocolour without a default-colour")
                if name != default_colour:
                    raise ParseError(
                        lineno,
                        f"nocolour {name} does not match default-colour {default_colour}",
                    )
                current.touch(v)
                current.suppressed.add((name, v))
            continue

        current = None
        if head == "nonterminal":
            if len(args) != 2 or not args[1].isdigit():
                raise ParseError(lineno, "nonterminal needs NAME ARITY")
            declare(lineno, nonterminals, args[0], int(args[1]))
        elif head == "terminal":
            if len(args) != 2 or not args[1].isdigit():
                raise ParseError(lineno, "terminal needs NAME ARITY")
            declare(lineno, terminals, args[0], int(args[1]))
        elif head == "colour":
            if len(args) != 1:
                raise ParseError(lineno, "top-level colour needs just NAME")
            declare(lineno, terminals, args[0], 1)
        elif head == "prob":
            if len(args) != 2:
                raise ParseError(lineno, "prob needs LABEL VALUE")
            if args[0] in mu:
                raise ParseError(lineno, f"probability for {args[0]} given twice")
            mu[args[0]] = _fraction(lineno, args[1])
        elif head == "axiom":
            if len(args) != 1:
                raise ParseError(lineno, "axiom needs NAME")
            if axiom is not None:
                raise ParseError(lineno, "axiom given twice")
            axiom = args[0]
        elif head == "default-colour":
            if len(args) != 1:
                raise ParseError(lineno, "default-colour needs NAME")
            if default_colour is not None:
                raise ParseError(lineno, "default-colour given twice")
            default_colour = args[0]
        elif head == "absorbing":
            if len(args) != 1:
                raise ParseError(lineno, "absorbing needs NAME")
            absorbing.add(args[0])
        elif head == "rule":
            if not args:
                raise ParseError(lineno, "rule needs a nonterminal name")
            name = args[0]
            rest = args[1:]
            if rest:
                if rest[0] != "inputs":
                    raise ParseError(lineno, "expected 'inputs' after the rule name")
                inputs = tuple(rest[1:])
            else:
                inputs = ()
            current = _RuleDraft(lineno, name, inputs)
            drafts.append(current)
        else:
            raise ParseError(lineno, f"unknown keyword {head!r}")

    if axiom is None:
        raise ParseError(0, "no axiom line")

    rules: list[Rule] = []
    for draft in drafts:
        rhs = Hypergraph()
        for v in draft.order:
            rhs.add_vertex(v)
        rhs.arcs = list(draft.arcs)
        rhs.hyperarcs = list(draft.hyperarcs)
        marks = list(draft.colours)
        if default_colour is not None:
            if default_colour not in terminals:
                raise ParseError(draft.lineno, f"default-colour {default_colour} not declared")
            present = {(c, v) for c, v in marks}
            for v in draft.order:
                key = (default_colour, v)
                if key not in present and key not in draft.suppressed:
                    marks.append(ColourMark(default_colour, v))
        rhs.colours = marks
        rules.append(Rule(draft.name, draft.inputs, rhs))

    return Grammar(
        terminals=terminals,
        nonterminals=nonterminals,
        axiom=axiom,
        rules=rules,
        mu=mu,
        absorbing=absorbing,
    )


def load_grammar(path) -> Grammar:
    with open(path, "r", encoding="utf-8") as fh:
        return parse_grammar(fh.read())


def _mention_order(rule: Rule) -> list[str]:
    order: list[str] = []
    seen: set[str] = set()

    def touch(v: str) -> None:
        if v not in seen:
            seen.add(v)
            order.append(v)

    for v in rule.inputs:
        touch(v)
    for arc in rule.rhs.arcs:
        touch(arc.source)
        touch(arc.target)
    for h in rule.rhs.hyperarcs:
        for v in h.vertices:
            touch(v)
    for _, v in rule.rhs.colours:
        touch(v)
    return order


def serialize_grammar(g: Grammar) -> str:
    lines: list[str] = []
    for name, arity in g.nonterminals.items():
        lines.append(f"nonterminal {name} {arity}")
    for name, arity in g.terminals.items():
        if arity == 1:
            lines.append(f"colour {name}")
        else:
            lines.append(f"terminal {name} {arity}")
    for label, p in g.mu.items():
        lines.append(f"prob {label} {p}")
    for name in sorted(g.absorbing):
        lines.append(f"absorbing {name}")
    lines.append(f"axiom {g.axiom}")
    for rule in g.rules:
        lines.append("")
        if rule.inputs:
            lines.append(f"rule {rule.lhs} inputs {' '.join(map(str, rule.inputs))}")
        else:
            lines.append(f"rule {rule.lhs}")
        if _mention_order(rule) != list(rule.rhs.vertices):
            lines.append(f"  vertex {' '.join(map(str, rule.rhs.vertices))}")
        for arc in rule.rhs.arcs:
            lines.append(f"  arc {arc.label} {arc.source} {arc.target}")
        for h in rule.rhs.hyperarcs:
            lines.append(f"  hyperarc {h.label} {' '.join(map(str, h.vertices))}")
        for colour, v in rule.rhs.colours:
            lines.append(f"  colour {colour} {v}")
    lines.append("")
    return "\n".join(lines)


def _esc(text: str) -> str:
    return text.replace("\\", "\\\\").replace('"', '\\"')


def emit_dot(
    graph: Hypergraph,
    vertices: dict[VertexId, ConcreteVertex] | None = None,
    name: str = "graph0",
) -> str:
    """Graphviz rendering: solid labelled arcs, dashed numbered hyperarc legs,
    colour marks listed under each vertex name."""
    colour_sets = graph.colour_sets()
    out = [f"digraph {_esc(name)} {{", "  rankdir=LR;", '  node [shape=ellipse];']
    for v in graph.vertices:
        label = str(v)
        cs = sorted(colour_sets.get(v, frozenset()))
        if cs:
            label += "\\n" + ",".join(cs)
        extra = ""
        if vertices is not None and v in vertices:
            cv = vertices[v]
            extra = f', tooltip="level {cv.level}, from {cv.can}"'
        out.append(f'  "{_esc(str(v))}" [label="{_esc(label)}"{extra}];')
    for arc in graph.arcs:
        out.append(
            f'  "{_esc(str(arc.source))}" -> "{_esc(str(arc.target))}" '
            f'[label="{_esc(arc.label)}"];'
        )
    for i, h in enumerate(graph.hyperarcs):
        hub = f"__hyperarc_{i}"
        out.append(f'  "{hub}" [shape=box, style=dashed, label="{_esc(h.label)}"];')
        for pos, v in enumerate(h.vertices, start=1):
            out.append(
                f'  "{hub}" -> "{_esc(str(v))}" [style=dashed, label="{pos}"];'
            )
    out.append("}")
    return "\n".join(out) + "\n"
