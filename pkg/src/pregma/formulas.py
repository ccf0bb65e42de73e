"""State formulas: truth, atoms, negation, conjunction, and probabilistic
one-step / until operators with a rational threshold.

Concrete syntax, loosest binding last:

    unary:  tt | NAME | ! unary | X[>=1/2] unary | F[...] unary | G[...] unary | ( expr )
    conj:   unary & unary & ...
    expr:   conj | conj U[<=2/3] conj

NAME is a colour or an axiom-rule vertex name (letters, digits, _, ').
Thresholds are exact rationals in [0, 1], written like 1, 0, 2/3.
F[~r] p is shorthand for tt U[~r] p; G[~r] p turns into the dual until with
the comparison flipped around 1-r. Parsing is total: anything malformed
raises FormulaError with a position.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction


class FormulaError(ValueError):
    pass


@dataclass(frozen=True)
class TT:
    def __str__(self) -> str:
        return "tt"


@dataclass(frozen=True)
class Atom:
    name: str

    def __str__(self) -> str:
        return self.name


@dataclass(frozen=True)
class Not:
    sub: "Formula"

    def __str__(self) -> str:
        return f"!{_wrap(self.sub)}"


@dataclass(frozen=True)
class And:
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} & {_wrap(self.right)}"


@dataclass(frozen=True)
class Next:
    cmp: str
    rho: Fraction
    sub: "Formula"

    def __str__(self) -> str:
        return f"X[{self.cmp}{self.rho}] {_wrap(self.sub)}"


@dataclass(frozen=True)
class Until:
    cmp: str
    rho: Fraction
    left: "Formula"
    right: "Formula"

    def __str__(self) -> str:
        return f"{_wrap(self.left)} U[{self.cmp}{self.rho}] {_wrap(self.right)}"


Formula = TT | Atom | Not | And | Next | Until


def _wrap(f: Formula) -> str:
    if isinstance(f, (And, Until)):
        return f"({f})"
    return str(f)


def to_text(f: Formula) -> str:
    return str(f)


def atoms(f: Formula) -> frozenset[str]:
    if isinstance(f, Atom):
        return frozenset([f.name])
    if isinstance(f, (TT,)):
        return frozenset()
    if isinstance(f, Not):
        return atoms(f.sub)
    if isinstance(f, Next):
        return atoms(f.sub)
    if isinstance(f, (And, Until)):
        return atoms(f.left) | atoms(f.right)
    raise TypeError(f)


_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+(?:/\d+)?)"
    r"|(?P<name>[A-Za-z_][A-Za-z0-9_']*)"
    r"|(?P<cmp><=|>=|<|>)"
    r"|(?P<sym>[!&()\[\]]))"
)

_FLIP = {">=": "<=", "<=": ">=", ">": "<", "<": ">"}


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0
        self.tokens: list[tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            m = _TOKEN.match(text, pos)
            if m is None or m.end() == pos:
                rest = text[pos:].strip()
                if not rest:
                    break
                raise FormulaError(f"cannot read {rest[:10]!r} at offset {pos}")
            for kind in ("num", "name", "cmp", "sym"):
                if m.group(kind) is not None:
                    self.tokens.append((kind, m.group(kind), m.start(kind)))
                    break
            pos = m.end()
        self.i = 0

    def peek(self) -> tuple[str, str, int] | None:
        return self.tokens[self.i] if self.i < len(self.tokens) else None

    def take(self, kind: str | None = None, value: str | None = None):
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of formula")
        if kind is not None and tok[0] != kind:
            raise FormulaError(f"expected {kind}, got {tok[1]!r} at offset {tok[2]}")
        if value is not None and tok[1] != value:
            raise FormulaError(f"expected {value!r}, got {tok[1]!r} at offset {tok[2]}")
        self.i += 1
        return tok

    def box(self) -> tuple[str, Fraction]:
        self.take("sym", "[")
        cmp = self.take("cmp")[1]
        num = self.take("num")
        rho = Fraction(num[1])
        if not (0 <= rho <= 1):
            raise FormulaError(
                f"threshold {rho} at offset {num[2]} is outside [0, 1]"
            )
        self.take("sym", "]")
        return cmp, rho

    def unary(self) -> Formula:
        tok = self.peek()
        if tok is None:
            raise FormulaError("unexpected end of formula")
        kind, value, off = tok
        if kind == "sym" and value == "!":
            self.take()
            return Not(self.unary())
        if kind == "sym" and value == "(":
            self.take()
            f = self.expr()
            self.take("sym", ")")
            return f
        if kind == "name" and value == "tt":
            self.take()
            return TT()
        if kind == "name" and value == "X":
            self.take()
            cmp, rho = self.box()
            return Next(cmp, rho, self.unary())
        if kind == "name" and value == "F":
            self.take()
            cmp, rho = self.box()
            return Until(cmp, rho, TT(), self.unary())
        if kind == "name" and value == "G":
            self.take()
            cmp, rho = self.box()
            return Until(_FLIP[cmp], 1 - rho, TT(), Not(self.unary()))
        if kind == "name":
            if value == "U":
                raise FormulaError(f"U needs a left operand (offset {off})")
            self.take()
            return Atom(value)
        raise FormulaError(f"unexpected {value!r} at offset {off}")

    def conj(self) -> Formula:
        f = self.unary()
        while True:
            tok = self.peek()
            if tok is not None and tok[0] == "sym" and tok[1] == "&":
                self.take()
                f = And(f, self.unary())
            else:
                return f

    def expr(self) -> Formula:
        f = self.conj()
        tok = self.peek()
        if tok is not None and tok[0] == "name" and tok[1] == "U":
            self.take()
            cmp, rho = self.box()
            right = self.conj()
            after = self.peek()
            if after is not None and after[0] == "name" and after[1] == "U":
                raise FormulaError(
                    "until does not chain; parenthesise one side"
                )
            return Until(cmp, rho, f, right)
        return f

    def parse(self) -> Formula:
        f = self.expr()
        tok = self.peek()
        if tok is not None:
            raise FormulaError(f"trailing {tok[1]!r} at offset {tok[2]}")
        return f


def parse_formula(text: str) -> Formula:
    return _Parser(text).parse()
