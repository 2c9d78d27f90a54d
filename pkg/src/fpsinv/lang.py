"""Text format for series maps: parsing, evaluation and canonical printing.

Input grammar (whitespace insignificant, ``#`` starts a comment)::

    map    := line+
    line   := ident "=" expr
    expr   := ("+"|"-")? term (("+"|"-") term)*
    term   := factor ("*" factor)*
    factor := atom ("^" nat)?
    atom   := int | int "/" int | ident | "(" expr ")" | func "(" expr ")"

An optional ``vars: X, Y`` header fixes the variable order.  Without it a
single definition is read in the one identifier it mentions (``X`` if none).  Definitions are named
``<prefix><index>`` (``F1``, ``F2``, ...) and index the components from 1.
"""
from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Union

from gmpy2 import mpq

from .errors import (
    CompositionDomainError,
    InvalidParameterError,
    ParseError,
    UnsupportedFieldError,
)
from .field import FieldSpec
from .series import (
    SeriesMap,
    TruncatedSeries,
    ps_add,
    ps_compose,
    ps_mul,
    ps_neg,
    ps_order,
    ps_pow,
    ps_sub,
)

ELEMENTARY = ("sin", "cos", "exp", "log1p")


# ---------------------------------------------------------------------------
# AST


@dataclass(frozen=True)
class Num:
    num: int
    den: int = 1


@dataclass(frozen=True)
class Var:
    name: str
    line: int = 0
    column: int = 0


@dataclass(frozen=True)
class BinOp:
    op: str  # one of + - *
    left: "Node"
    right: "Node"


@dataclass(frozen=True)
class Neg:
    operand: "Node"


@dataclass(frozen=True)
class Pow:
    base: "Node"
    exponent: int


@dataclass(frozen=True)
class Call:
    name: str
    argument: "Node"
    line: int = 0
    column: int = 0


Node = Union[Num, Var, BinOp, Neg, Pow, Call]


@dataclass
class MapSource:
    """Parsed, not yet evaluated, map definition."""

    variables: list[str]
    definitions: list[tuple[int, Node]] = field(default_factory=list)
    names: list[str] = field(default_factory=list)

    def ordered(self) -> list[Node]:
        return [node for _, node in sorted(self.definitions, key=lambda d: d[0])]


# ---------------------------------------------------------------------------
# tokenizer

_TOKEN_RE = re.compile(
    r"(?P<ws>[ \t\r]+)|(?P<int>\d+)|(?P<ident>[A-Za-z_][A-Za-z_0-9]*)|(?P<op>[-+*/^=(),:])"
)


@dataclass(frozen=True)
class Token:
    kind: str  # int, ident, op, eol
    text: str
    line: int
    column: int


def _tokenize_line(text: str, lineno: int) -> list[Token]:
    tokens = []
    pos = 0
    while pos < len(text):
        if text[pos] == "#":
            break
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", lineno, pos + 1)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), lineno, pos + 1))
        pos = m.end()
    tokens.append(Token("eol", "", lineno, len(text) + 1))
    return tokens


class _Parser:
    def __init__(self, tokens: list[Token]):
        self.tokens = tokens
        self.pos = 0

    @property
    def tok(self) -> Token:
        return self.tokens[self.pos]

    def advance(self) -> Token:
        t = self.tokens[self.pos]
        self.pos += 1
        return t

    def error(self, message, tok=None):
        tok = tok or self.tok
        return ParseError(message, tok.line, tok.column)

    def expect(self, text: str) -> Token:
        if self.tok.kind == "op" and self.tok.text == text:
            return self.advance()
        found = "end of line" if self.tok.kind == "eol" else repr(self.tok.text)
        raise self.error(f"expected {text!r}, found {found}")

    def at(self, text: str) -> bool:
        return self.tok.kind == "op" and self.tok.text == text

    def expr(self) -> Node:
        neg = False
        if self.at("-") or self.at("+"):
            neg = self.advance().text == "-"
        node = self.term()
        if neg:
            node = Neg(node)
        while self.at("+") or self.at("-"):
            op = self.advance().text
            node = BinOp(op, node, self.term())
        return node

    def term(self) -> Node:
        node = self.factor()
        while self.at("*"):
            self.advance()
            node = BinOp("*", node, self.factor())
        return node

    def factor(self) -> Node:
        node = self.atom()
        if self.at("^"):
            self.advance()
            if self.at("-"):
                raise self.error("exponents must be non-negative integers")
            if self.tok.kind != "int":
                raise self.error("expected a natural-number exponent")
            node = Pow(node, int(self.advance().text))
        return node

    def atom(self) -> Node:
        tok = self.tok
        if tok.kind == "int":
            self.advance()
            if self.at("/"):
                self.advance()
                if self.tok.kind != "int":
                    raise self.error("expected an integer denominator")
                den_tok = self.advance()
                if int(den_tok.text) == 0:
                    raise ParseError("zero denominator", den_tok.line, den_tok.column)
                return Num(int(tok.text), int(den_tok.text))
            return Num(int(tok.text))
        if tok.kind == "ident":
            self.advance()
            if self.at("("):
                if tok.text not in ELEMENTARY:
                    raise self.error(f"unknown function {tok.text!r}", tok)
                self.advance()
                arg = self.expr()
                self.expect(")")
                return Call(tok.text, arg, tok.line, tok.column)
            return Var(tok.text, tok.line, tok.column)
        if self.at("("):
            self.advance()
            node = self.expr()
            self.expect(")")
            return node
        found = "end of line" if tok.kind == "eol" else repr(tok.text)
        raise self.error(f"unexpected {found}")


_LHS_RE = re.compile(r"^[A-Za-z_]*?(\d+)$")


def parse_source(text: str) -> MapSource:
    """Parse map text into a :class:`MapSource` without evaluating it."""
    variables = None
    header_line = None
    defs: list[tuple[int, str, Node, Token]] = []
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        tokens = _tokenize_line(raw_line, lineno)
        if tokens[0].kind == "eol":
            continue
        p = _Parser(tokens)
        head = p.advance()
        if head.kind != "ident":
            raise ParseError("a line must start with an identifier", head.line, head.column)
        if head.text == "vars" and p.at(":"):
            if variables is not None or defs:
                raise ParseError("the vars header must come first and only once", head.line, head.column)
            p.advance()
            variables = []
            while True:
                if p.tok.kind != "ident":
                    raise p.error("expected a variable name")
                name = p.advance()
                if name.text in variables:
                    raise ParseError(f"variable {name.text!r} declared twice", name.line, name.column)
                if name.text in ELEMENTARY:
                    raise ParseError(f"{name.text!r} is a function name", name.line, name.column)
                variables.append(name.text)
                if p.at(","):
                    p.advance()
                    continue
                break
            if p.tok.kind != "eol":
                raise p.error("unexpected text after variable list")
            header_line = lineno
            continue
        p.expect("=")
        node = p.expr()
        if p.tok.kind != "eol":
            raise p.error(f"unexpected {p.tok.text!r}")
        m = _LHS_RE.match(head.text)
        if not m or int(m.group(1)) < 1:
            raise ParseError(
                f"definition name {head.text!r} must end in a component index >= 1",
                head.line,
                head.column,
            )
        defs.append((int(m.group(1)), head.text, node, head))

    if not defs:
        raise ParseError("no definitions found", 1, 1)
    if variables is None:
        if len(defs) != 1:
            raise ParseError("a 'vars:' header is required for maps with several components", 1, 1)
        used = sorted(_identifiers(defs[0][2]))
        if len(used) > 1:
            raise ParseError(
                f"several identifiers {used} but no 'vars:' header", defs[0][3].line, defs[0][3].column
            )
        variables = used or ["X"]
    n = len(variables)
    seen: dict[int, str] = {}
    for index, name, _, tok in defs:
        if index in seen:
            raise ParseError(f"component {index} defined twice ({seen[index]}, {name})", tok.line, tok.column)
        if index > n:
            raise ParseError(
                f"component {index} exceeds the {n} declared variable(s)", tok.line, tok.column
            )
        seen[index] = name
    missing = [i for i in range(1, n + 1) if i not in seen]
    if missing:
        raise ParseError(f"missing definition for component(s) {missing}", header_line or 1, 1)
    for _, _, node, _ in defs:
        _check_names(node, variables)
    defs.sort(key=lambda d: d[0])
    return MapSource(
        variables=variables,
        definitions=[(i - 1, node) for i, _, node, _ in defs],
        names=[name for _, name, _, _ in defs],
    )


def _identifiers(node: Node) -> set[str]:
    if isinstance(node, Var):
        return {node.name}
    if isinstance(node, BinOp):
        return _identifiers(node.left) | _identifiers(node.right)
    if isinstance(node, Neg):
        return _identifiers(node.operand)
    if isinstance(node, Pow):
        return _identifiers(node.base)
    if isinstance(node, Call):
        return _identifiers(node.argument)
    return set()


def _check_names(node: Node, variables: list[str]):
    if isinstance(node, Var):
        if node.name not in variables:
            raise ParseError(f"unknown identifier {node.name!r}", node.line, node.column)
    elif isinstance(node, BinOp):
        _check_names(node.left, variables)
        _check_names(node.right, variables)
    elif isinstance(node, (Neg, Pow)):
        _check_names(node.operand if isinstance(node, Neg) else node.base, variables)
    elif isinstance(node, Call):
        _check_names(node.argument, variables)


# ---------------------------------------------------------------------------
# evaluation


def expand_elementary(name: str, max_degree: int, spec: FieldSpec) -> TruncatedSeries:
    """Univariate Maclaurin series of an elementary function."""
    if name not in ELEMENTARY:
        raise InvalidParameterError(f"unknown elementary function {name!r}")
    if not spec.is_rational:
        raise UnsupportedFieldError(f"{name} needs characteristic 0, not {spec}")
    coeffs = {}
    for j in range(max_degree + 1):
        if name == "exp":
            c = mpq(1, math.factorial(j))
        elif name == "sin":
            c = mpq((-1) ** (j // 2), math.factorial(j)) if j % 2 else 0
        elif name == "cos":
            c = 0 if j % 2 else mpq((-1) ** (j // 2), math.factorial(j))
        else:
            c = mpq((-1) ** (j + 1), j) if j else 0
        if c:
            coeffs[(j,)] = c
    return TruncatedSeries(1, max_degree, spec, coeffs)


def evaluate(node: Node, variables: list[str], spec: FieldSpec, max_degree: int) -> TruncatedSeries:
    n = len(variables)
    if isinstance(node, Num):
        return TruncatedSeries.constant(spec.from_ratio(node.num, node.den), n, max_degree, spec)
    if isinstance(node, Var):
        return TruncatedSeries.variable(variables.index(node.name), n, max_degree, spec)
    if isinstance(node, Neg):
        return ps_neg(evaluate(node.operand, variables, spec, max_degree))
    if isinstance(node, BinOp):
        a = evaluate(node.left, variables, spec, max_degree)
        b = evaluate(node.right, variables, spec, max_degree)
        if node.op == "+":
            return ps_add(a, b)
        if node.op == "-":
            return ps_sub(a, b)
        return ps_mul(a, b)
    if isinstance(node, Pow):
        return ps_pow(evaluate(node.base, variables, spec, max_degree), node.exponent)
    if isinstance(node, Call):
        if not spec.is_rational:
            raise UnsupportedFieldError(
                f"line {node.line}, column {node.column}: {node.name} is only supported over Q"
            )
        arg = evaluate(node.argument, variables, spec, max_degree)
        if ps_order(arg) < 1:
            raise CompositionDomainError(
                f"line {node.line}, column {node.column}: argument of {node.name} "
                "must have zero constant term"
            )
        return ps_compose(expand_elementary(node.name, max_degree, spec), [arg])
    raise TypeError(f"unknown node {node!r}")


def evaluate_source(src: MapSource, spec: FieldSpec, max_degree: int) -> SeriesMap:
    return SeriesMap(evaluate(node, src.variables, spec, max_degree) for node in src.ordered())


def parse_map(text: str, spec: FieldSpec, max_degree: int) -> SeriesMap:
    return evaluate_source(parse_source(text), spec, max_degree)


def parse_sections(text: str) -> dict[str, str]:
    """Split ``map NAME:`` sections; lines before the first section are shared.

    Each returned text keeps the original line numbering (lines belonging to
    other sections are blanked), so parse errors point into the input file.
    """
    lines = text.splitlines()
    owner: list[str | None] = []
    sections: list[str] = []
    current = None
    for lineno, line in enumerate(lines, start=1):
        m = re.match(r"^\s*map\s+([A-Za-z_]\w*)\s*:\s*(#.*)?$", line)
        if m:
            current = m.group(1)
            if current in sections:
                raise ParseError(f"section {current!r} appears twice", lineno, 1)
            sections.append(current)
            owner.append("")
            continue
        owner.append(current)
    if not sections:
        raise ParseError("no 'map NAME:' sections found", 1, 1)
    return {
        name: "\n".join(line if owner[i] in (None, name) else "" for i, line in enumerate(lines))
        for name in sections
    }


# ---------------------------------------------------------------------------
# output


def _monomial(exps, names) -> str:
    parts = []
    for e, name in zip(exps, names):
        if e == 1:
            parts.append(name)
        elif e > 1:
            parts.append(f"{name}^{e}")
    return "*".join(parts)


def format_series(f: TruncatedSeries, names: list[str] | None = None) -> str:
    """Canonical text: ascending degree, ``X1``-heavy first, ``O(...)`` tail."""
    if names is None:
        names = default_names(f.nvars)
    if len(names) != f.nvars:
        raise InvalidParameterError(f"need {f.nvars} variable names, got {len(names)}")
    spec = f.spec
    chunks = []
    for exps, c in f.items():
        raw = c.value
        negative = spec.is_rational and raw < 0
        mag = spec.format(-raw if negative else raw)
        mono = _monomial(exps, names)
        if not mono:
            body = mag
        elif mag == "1":
            body = mono
        else:
            body = f"{mag}*{mono}"
        if not chunks:
            chunks.append(f"-{body}" if negative else body)
        else:
            chunks.append(f"- {body}" if negative else f"+ {body}")
    if not chunks:
        chunks.append("0")
    return f"{' '.join(chunks)} + O({', '.join(names)})^{f.max_degree + 1}"


def default_names(n: int) -> list[str]:
    if n <= 3:
        return ["X", "Y", "Z"][:n]
    return [f"X{i + 1}" for i in range(n)]


def format_map(m: SeriesMap, names: list[str] | None = None, prefix: str = "F") -> str:
    names = names or default_names(m.nvars)
    return "\n".join(f"{prefix}{i + 1} = {format_series(c, names)}" for i, c in enumerate(m))


def map_to_text(m: SeriesMap, names: list[str] | None = None, prefix: str = "F") -> str:
    """Re-parseable text (no ``O(...)`` markers) with a ``vars:`` header."""
    names = names or default_names(m.nvars)
    lines = [f"vars: {', '.join(names)}"]
    for i, c in enumerate(m):
        body = format_series(c, names).rsplit(" + O(", 1)[0]
        lines.append(f"{prefix}{i + 1} = {body}")
    return "\n".join(lines) + "\n"


def series_to_json(f: TruncatedSeries) -> list[dict]:
    return [{"exponents": list(e), "coefficient": str(c)} for e, c in f.items()]


def map_to_json(m: SeriesMap) -> list[dict]:
    return [{"component": i + 1, "terms": series_to_json(c)} for i, c in enumerate(m)]


def _parse_coefficient(text: str, spec: FieldSpec):
    num, _, den = str(text).partition("/")
    return spec.from_ratio(int(num), int(den) if den else 1)


def map_from_json(items: list[dict], nvars: int, max_degree: int, spec: FieldSpec) -> SeriesMap:
    comps = []
    for expected, item in enumerate(sorted(items, key=lambda d: d["component"]), start=1):
        if item["component"] != expected:
            raise InvalidParameterError(f"component {expected} missing from JSON")
        terms = {}
        for term in item["terms"]:
            exps = tuple(term["exponents"])
            if len(exps) != nvars:
                raise InvalidParameterError(f"exponent {list(exps)} does not have {nvars} entries")
            terms[exps] = _parse_coefficient(term["coefficient"], spec)
        comps.append(TruncatedSeries(nvars, max_degree, spec, terms))
    return SeriesMap(comps)
