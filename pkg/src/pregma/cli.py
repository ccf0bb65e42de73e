"""Command line front door.

Exit codes are part of the contract: 0 for success (and `holds` verdicts),
1 for validation failures and `fails` verdicts, 2 for `unknown` verdicts,
3 for usage errors. Results go to stdout, diagnostics to stderr. With
`--format json-lines` every result is one self-describing JSON object per
line and rationals stay exact as "p/q" strings; the default text format
adds rounded decimals for reading.
"""
from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from . import __version__
from .formulas import Formula, FormulaError, Next, Not, And, Until, parse_formula, to_text
from .gio import ParseError, emit_dot, load_grammar, serialize_grammar
from .labeling import classes_for_colours, label_formula
from .model import (
    CanonicalVertex,
    Grammar,
    GrammarError,
    expand,
    reachable_component,
    validate_grammar,
)
from .oracle import HorizonError, PathQuery, bounded_until, sample_until, truncate
from .pcp import encode, load_pcp
from .pushdown import load_pds, to_grammar
from .quantitative import axiom_probability, render_key, solve_until
from .validation import check_complete_outside, phr_check

USAGE_EXIT = 3


class _Parser(argparse.ArgumentParser):
    """argparse exits 2 on bad usage; the contract here says 3."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational: {text!r} ({exc})")
    return value


def _positive_fraction(text: str) -> Fraction:
    value = _fraction(text)
    if value <= 0:
        raise argparse.ArgumentTypeError("must be > 0")
    return value


def _load(path: str) -> Grammar:
    try:
        return load_grammar(path)
    except OSError as exc:
        print(f"cannot read {path}: {exc}", file=sys.stderr)
        raise SystemExit(1)
    except (ParseError, GrammarError) as exc:
        print(f"{path}: {exc}", file=sys.stderr)
        raise SystemExit(1)


def _colour_names(g: Grammar, expr: str, parser: _Parser) -> frozenset[str] | None:
    """Comma-separated colour names, or "tt" for no restriction."""
    if expr == "tt":
        return None
    names = frozenset(n.strip() for n in expr.split(",") if n.strip())
    if not names:
        parser.error(f"empty colour expression {expr!r}")
    unknown = names - set(g.colour_names)
    if unknown:
        parser.error(
            f"unknown colours {sorted(unknown)}; grammar has {g.colour_names}"
        )
    return names


def _axiom_vertex(g: Grammar, name: str, parser: _Parser) -> str:
    if not g.axiom_rule().rhs.has_vertex(name):
        known = sorted(map(str, g.axiom_rule().rhs.vertices))
        parser.error(f"{name!r} is not an axiom-rule vertex (known: {known})")
    return name


def _write_out(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
        if not text.endswith("\n"):
            sys.stdout.write("\n")
    else:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text if text.endswith("\n") else text + "\n")


def _emit(record: dict, fmt: str) -> None:
    if fmt == "json-lines":
        print(json.dumps(record, sort_keys=True))


# ---------------------------------------------------------------- validate


def _cmd_validate(args, parser: _Parser) -> int:
    g = _load(args.grammar)
    if g.mu:
        try:
            report = phr_check(g)
        except GrammarError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        if report.ok:
            return 0
        for line in report.outside.violations:
            print(line, file=sys.stderr)
        for f in report.failures:
            if f.total is not None:
                print(f"canonical={f.can} sum={f.total}", file=sys.stderr)
            else:
                print(f"canonical={f.can} {f.reason}", file=sys.stderr)
        return 1
    issues = validate_grammar(g)
    outside = check_complete_outside(g)
    for issue in issues:
        print(str(issue), file=sys.stderr)
    for line in outside.violations:
        print(line, file=sys.stderr)
    return 0 if not issues and outside.ok else 1


# ------------------------------------------------------------- converters


def _cmd_from_pds(args, parser: _Parser) -> int:
    try:
        system = load_pds(args.input)
        g = to_grammar(system)
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    except (ParseError, GrammarError) as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return 1
    _write_out(serialize_grammar(g), args.output)
    return 0


def _cmd_gen_pcp(args, parser: _Parser) -> int:
    try:
        instance = load_pcp(args.input)
    except OSError as exc:
        print(f"cannot read {args.input}: {exc}", file=sys.stderr)
        return 1
    except (ParseError, GrammarError) as exc:
        print(f"{args.input}: {exc}", file=sys.stderr)
        return 1
    g, _, formula = encode(instance)
    text = serialize_grammar(g)
    text += f"\n# matching forks satisfy: {to_text(formula)}\n"
    _write_out(text, args.output)
    return 0


# ------------------------------------------------------------------ expand


def _cmd_expand(args, parser: _Parser) -> int:
    g = _load(args.grammar)
    try:
        if args.component is not None:
            _axiom_vertex(g, args.component, parser)
            graph, vertices = reachable_component(g, args.component, args.depth)
            frontier: frozenset = frozenset()
        else:
            expansion = expand(g, args.depth)
            graph, vertices = expansion.graph, expansion.vertices
            frontier = expansion.frontier
    except GrammarError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    if args.format == "dot":
        _write_out(emit_dot(graph, vertices), args.output)
        return 0

    lines: list[str] = []
    colour_sets = graph.colour_sets()
    if args.format == "json-lines":
        for v in graph.vertices:
            cv = vertices[v]
            lines.append(json.dumps({
                "kind": "vertex", "id": str(v), "level": cv.level,
                "class": str(cv.can), "colours": sorted(colour_sets.get(v, ())),
                "frontier": v in frontier,
            }, sort_keys=True))
        for arc in graph.arcs:
            lines.append(json.dumps({
                "kind": "arc", "label": arc.label,
                "source": str(arc.source), "target": str(arc.target),
            }, sort_keys=True))
        for h in graph.hyperarcs:
            lines.append(json.dumps({
                "kind": "hyperarc", "label": h.label,
                "vertices": [str(v) for v in h.vertices],
            }, sort_keys=True))
    else:
        lines.append(
            f"vertices={len(graph.vertices)} arcs={len(graph.arcs)} "
            f"hyperarcs={len(graph.hyperarcs)} frontier={len(frontier)}"
        )
        for v in graph.vertices:
            cv = vertices[v]
            marks = ",".join(sorted(colour_sets.get(v, ())))
            tag = " frontier" if v in frontier else ""
            lines.append(
                f"vertex {v} level={cv.level} class={cv.can}"
                + (f" colours={marks}" if marks else "") + tag
            )
        for arc in graph.arcs:
            lines.append(f"arc {arc.label} {arc.source} {arc.target}")
        for h in graph.hyperarcs:
            lines.append(f"hyperarc {h.label} " + " ".join(map(str, h.vertices)))
    _write_out("\n".join(lines), args.output)
    return 0


# -------------------------------------------------------------------- prob


def _require_mu(g: Grammar) -> None:
    if not g.mu:
        print("grammar declares no arc probabilities", file=sys.stderr)
        raise SystemExit(1)


def _cmd_prob(args, parser: _Parser) -> int:
    g = _load(args.grammar)
    _require_mu(g)
    _axiom_vertex(g, args.start, parser)
    phi1_names = _colour_names(g, args.phi1, parser)
    phi2_names = _colour_names(g, args.phi2, parser)

    if args.method == "enclosure":
        phi1 = classes_for_colours(g, phi1_names)
        phi2 = classes_for_colours(g, phi2_names)
        try:
            sol = solve_until(g, g.mu, phi1, phi2, eps=args.eps)
        except GrammarError as exc:
            print(str(exc), file=sys.stderr)
            return 1
        if args.emit_system:
            reduced = sol.assembly.reduced()
            for key, value in sol.assembly.pins.items():
                print(f"pin {render_key(key)} = {value}")
            print(reduced.render(render_key))
        lo, hi = axiom_probability(sol, g, args.start)
        if args.format == "json-lines":
            _emit({
                "kind": "enclosure", "lower": str(lo), "upper": str(hi),
                "converged": sol.converged, "exact": sol.exact,
            }, args.format)
        else:
            print(f"lower={lo} upper={hi}")
            state = "exact" if sol.exact else (
                "converged" if sol.converged else "not converged"
            )
            print(
                f"decimal [{float(lo):.12f}, {float(hi):.12f}] "
                f"width={float(hi - lo):.3e} ({state})"
            )
        return 0

    horizon = args.horizon
    if horizon is None:
        parser.error(f"--horizon is required with --method {args.method}")
    depth = args.depth if args.depth is not None else horizon + 2
    try:
        mc = truncate(g, depth)
        query = PathQuery(phi1_names, phi2_names, args.start, horizon)
        if args.method == "truncate":
            value = bounded_until(mc, query)
            if args.format == "json-lines":
                _emit({
                    "kind": "bounded", "horizon": horizon, "depth": depth,
                    "value": str(value),
                }, args.format)
            else:
                print(f"bounded={value}")
                print(f"decimal {float(value):.12f} (horizon {horizon})")
            return 0
        result = sample_until(mc, query, args.trajectories, args.seed)
    except (GrammarError, HorizonError) as exc:
        print(str(exc), file=sys.stderr)
        return 1
    n = args.trajectories
    if args.format == "json-lines":
        _emit({
            "kind": "sample", "hits": result.hits, "escapes": result.escapes,
            "n": n, "seed": args.seed, "horizon": horizon, "depth": depth,
        }, args.format)
    else:
        print(f"hits={result.hits} escapes={result.escapes} n={n}")
        print(
            f"estimate [{result.hits / n:.6f}, "
            f"{(result.hits + result.escapes) / n:.6f}] (seed {args.seed})"
        )
    return 0


# ------------------------------------------------------------------- check


def _qualitative_only(f: Formula) -> bool:
    if isinstance(f, (Next, Until)):
        if f.rho not in (Fraction(0), Fraction(1)):
            return False
    if isinstance(f, (Not, Next)):
        return _qualitative_only(f.sub)
    if isinstance(f, (And, Until)):
        return _qualitative_only(f.left) and _qualitative_only(f.right)
    return True


_EXIT_BY_STATUS = {"holds": 0, "fails": 1, "unknown": 2}


def _cmd_check(args, parser: _Parser) -> int:
    g = _load(args.grammar)
    _require_mu(g)
    try:
        formula = parse_formula(args.formula)
    except FormulaError as exc:
        parser.error(f"bad formula: {exc}")
    if args.qualitative and not _qualitative_only(formula):
        parser.error("--qualitative requires every threshold to be 0 or 1")
    try:
        labelling = label_formula(g, formula, eps=args.eps)
    except FormulaError as exc:
        parser.error(f"bad formula: {exc}")
    except GrammarError as exc:
        print(str(exc), file=sys.stderr)
        return 1

    def show(status: str, interval, record: dict) -> None:
        if args.format == "json-lines":
            if interval is not None:
                record["lower"] = str(interval[0])
                record["upper"] = str(interval[1])
            _emit(record, args.format)
        else:
            line = status
            if interval is not None:
                line += f" enclosure=[{interval[0]}, {interval[1]}]"
            print(line)

    if args.emit_coloured:
        for can, verdict in labelling.verdicts.items():
            if args.format == "json-lines":
                rec = {"kind": "class-verdict", "class": str(can),
                       "status": verdict.status}
                if verdict.interval is not None:
                    rec["lower"] = str(verdict.interval[0])
                    rec["upper"] = str(verdict.interval[1])
                _emit(rec, args.format)
            else:
                extra = ""
                if verdict.interval is not None:
                    extra = (f" enclosure=[{verdict.interval[0]},"
                             f" {verdict.interval[1]}]")
                print(f"class={can} verdict={verdict.status}{extra}")

    if args.at is not None:
        _axiom_vertex(g, args.at, parser)
        can = CanonicalVertex(g.axiom, args.at)
        verdict = labelling.at(can)
        show(verdict.status, verdict.interval,
             {"kind": "verdict", "at": args.at, "status": verdict.status})
        return _EXIT_BY_STATUS[verdict.status]

    statuses = {v.status for v in labelling.verdicts.values()}
    if statuses <= {"holds"}:
        overall = "holds"
    elif "fails" in statuses:
        overall = "fails"
    else:
        overall = "unknown"
    show(overall, None, {"kind": "verdict", "at": None, "status": overall})
    return _EXIT_BY_STATUS[overall]


# -------------------------------------------------------------------- main


def _build_parser() -> _Parser:
    parser = _Parser(prog="pregma", description=__doc__)
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("validate", help="structural and probability checks")
    p.add_argument("grammar")
    p.set_defaults(func=_cmd_validate)

    p = sub.add_parser("from-pds", help="suffix rewriting system to grammar")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_from_pds)

    p = sub.add_parser("gen-pcp", help="word-pair instance to gadget grammar")
    p.add_argument("input")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_gen_pcp)

    p = sub.add_parser("expand", help="materialize a finite prefix")
    p.add_argument("grammar")
    p.add_argument("--depth", type=int, required=True)
    p.add_argument("--format", choices=("text", "dot", "json-lines"),
                   default="text")
    p.add_argument("--component", default=None, metavar="VERTEX",
                   help="restrict to the connected component of this axiom vertex")
    p.add_argument("-o", "--output", default=None)
    p.set_defaults(func=_cmd_expand)

    p = sub.add_parser("prob", help="probability of an until query")
    p.add_argument("grammar")
    p.add_argument("--phi1", default="tt",
                   help='colour names, comma separated, or "tt"')
    p.add_argument("--phi2", required=True)
    p.add_argument("--from", dest="start", required=True,
                   metavar="VERTEX", help="axiom-rule vertex to start from")
    p.add_argument("--eps", type=_positive_fraction,
                   default=Fraction(1, 10**6))
    p.add_argument("--method", choices=("enclosure", "truncate", "sample"),
                   default="enclosure")
    p.add_argument("--horizon", type=int, default=None)
    p.add_argument("--depth", type=int, default=None)
    p.add_argument("--n", dest="trajectories", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--emit-system", action="store_true",
                   help="print the polynomial system before solving")
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    p.set_defaults(func=_cmd_prob)

    p = sub.add_parser("check", help="three-valued formula verdicts")
    p.add_argument("grammar")
    p.add_argument("--formula", required=True)
    p.add_argument("--at", default=None, metavar="VERTEX")
    p.add_argument("--eps", type=_positive_fraction,
                   default=Fraction(1, 10**6))
    p.add_argument("--qualitative", action="store_true",
                   help="reject formulas with thresholds other than 0 and 1")
    p.add_argument("--emit-coloured", action="store_true",
                   help="print one verdict line per vertex class")
    p.add_argument("--format", choices=("text", "json-lines"), default="text")
    p.set_defaults(func=_cmd_check)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args, parser)
    except SystemExit:
        raise
    except BrokenPipeError:
        return 0


if __name__ == "__main__":
    raise SystemExit(main())
