"""Text syntax: expressions, system-definition files and key = value documents.

Expression grammar (whitespace insignificant)::

    expr    := term (("+" | "-") term)*
    term    := unary (("*" | "/") unary)*
    unary   := ("-" | "+") unary | power
    power   := primary ("^" unary)?          # right-associative
    primary := number | name | func "(" expr ")" | "(" expr ")"

Numbers are integers, decimals (``9.8``, ``1e-3``) or rationals written
without spaces (``1/2``), all read exactly.  Names ``z1 zb1 zd1 zbd1 zdd1
zbdd1`` (and the real-chart ``x1 y1 xd1 yd1 ...``) are coordinates, ``t`` is
time, ``I`` the imaginary unit, and any other identifier is a parameter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import IndexOutOfRange, MissingParameter, ParseError
from .expr import (
    Add,
    Conj,
    Const,
    Coord,
    Div,
    Func,
    ImagUnit,
    Mul,
    Neg,
    Param,
    Pow,
    T,
    free_symbols,
    simplify,
    split_coord_name,
)
from .printer import print_expr

FUNCTION_NAMES = ("sqrt", "sin", "cos", "exp", "ln", "conj")

_TOKEN = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<rational>\d+/\d+(?![\d.eE]))
  | (?P<number>(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<op>[-+*/^()])
    """,
    re.VERBOSE,
)


@dataclass(frozen=True)
class Token:
    kind: str
    text: str
    offset: int


def tokenize(text):
    if not text.isascii():
        bad = next(i for i, ch in enumerate(text) if not ch.isascii())
        raise ParseError(f"non-ASCII character {text[bad]!r}", offset=len(text[:bad].encode()))
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            raise ParseError(f"unexpected character {text[pos]!r}", offset=pos,
                             expected={"number", "identifier", "operator"})
        kind = m.lastgroup
        if kind != "ws":
            tokens.append(Token(kind, m.group(), pos))
        pos = m.end()
    tokens.append(Token("end", "", len(text)))
    return tokens


PRIMARY_START = frozenset({"number", "identifier", "(", "-", "+"})


class _Parser:
    def __init__(self, text):
        self.text = text
        self.tokens = tokenize(text)
        self.pos = 0

    def peek(self):
        return self.tokens[self.pos]

    def advance(self):
        tok = self.tokens[self.pos]
        self.pos += 1
        return tok

    def error(self, message, tok, expected):
        offset = tok.offset
        if self.text:
            offset = min(offset, len(self.text) - 1)
        raise ParseError(message, offset=offset, expected=expected)

    def expect(self, text):
        tok = self.peek()
        if tok.text != text or tok.kind not in ("op",):
            what = "end of input" if tok.kind == "end" else repr(tok.text)
            self.error(f"unexpected {what}", tok, {repr(text)})
        return self.advance()

    def parse(self):
        e = self.expr()
        tok = self.peek()
        if tok.kind != "end":
            self.error(f"unexpected {tok.text!r}", tok, {"operator", "end of input"})
        return e

    def expr(self):
        terms = [self.term()]
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.advance().text
            rhs = self.term()
            terms.append(rhs if op == "+" else Neg(rhs))
        return terms[0] if len(terms) == 1 else Add(terms)

    def term(self):
        acc = self.unary()
        factors = None
        while self.peek().kind == "op" and self.peek().text in "*/":
            op = self.advance().text
            rhs = self.unary()
            if op == "*":
                factors = (factors or [acc]) + [rhs]
                acc = Mul(factors)
            else:
                factors = None
                acc = Div(acc, rhs)
        return acc

    def unary(self):
        tok = self.peek()
        if tok.kind == "op" and tok.text in "+-":
            self.advance()
            operand = self.unary()
            return Neg(operand) if tok.text == "-" else operand
        return self.power()

    def power(self):
        base = self.primary()
        if self.peek().kind == "op" and self.peek().text == "^":
            self.advance()
            return Pow(base, self.unary())
        return base

    def primary(self):
        tok = self.peek()
        if tok.kind == "rational":
            self.advance()
            num, den = tok.text.split("/")
            if int(den) == 0:
                self.error("zero denominator in rational literal", tok, {"number"})
            return Const(Fraction(int(num), int(den)))
        if tok.kind == "number":
            self.advance()
            return Const(Fraction(tok.text))
        if tok.kind == "name":
            self.advance()
            return self.name(tok)
        if tok.kind == "op" and tok.text == "(":
            self.advance()
            e = self.expr()
            self.expect(")")
            return e
        what = "end of input" if tok.kind == "end" else repr(tok.text)
        self.error(f"unexpected {what}", tok, PRIMARY_START)

    def name(self, tok):
        name = tok.text
        if name in FUNCTION_NAMES:
            self.expect("(")
            arg = self.expr()
            self.expect(")")
            return Conj(arg) if name == "conj" else Func(name, arg)
        if name == "I":
            return ImagUnit()
        if name == "t":
            return T
        role, index = split_coord_name(name)
        if role is not None:
            return Coord(role, index)
        stem = name.rstrip("0123456789")
        if stem != name and split_coord_name(stem + "1")[0] is not None:
            self.error(f"invalid coordinate index in {name!r}", tok, {"coordinate index >= 1"})
        return Param(name)


def parse_expr(text):
    """Parse ``text`` into a raw (unsimplified) expression tree."""
    return _Parser(text).parse()


# ---------------------------------------------------------------------------
# system-definition files


@dataclass
class SystemSpec:
    name: str
    dof: int
    params: dict
    lagrangian: object
    singular: list = field(default_factory=list)  # [(name, Expr)]

    def param_floats(self):
        return {k: float(v) for k, v in self.params.items()}

    @property
    def loci(self):
        return [e for _, e in self.singular]


SECTIONS = ("system", "params", "lagrangian", "singular")
_HEADER = re.compile(r"^\[([A-Za-z_][A-Za-z0-9_:.()\-]*)\]$")
_KEYVAL = re.compile(r"^([A-Za-z_][A-Za-z0-9_\[\],.:\-]*)\s*=\s*(.*)$")


def _logical_lines(text):
    """Yield (line number, byte offset of content, content) with comments stripped
    and backslash continuations joined."""
    offsets = []
    pos = 0
    raw = text.split("\n")
    for line in raw:
        offsets.append(pos)
        pos += len(line.encode()) + 1
    buf, start_no, start_off = None, None, None
    for no, line in enumerate(raw, 1):
        content = line.split("#", 1)[0].rstrip()
        lead = len(content) - len(content.lstrip())
        if buf is None:
            start_no, start_off = no, offsets[no - 1] + lead
            buf = ""
        if content.endswith("\\"):
            buf += content[:-1].strip() + " "
            continue
        buf += content.strip()
        if buf.strip():
            yield start_no, start_off, buf.strip()
        buf = None
    if buf is not None and buf.strip():
        yield start_no, start_off, buf.strip()


def _parse_number(text, no, off):
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ParseError(f"expected a decimal number, got {text.strip()!r}", offset=off, line=no,
                         expected={"number"}) from None


def _expr_at(text, no, off):
    try:
        return parse_expr(text)
    except ParseError as exc:
        raise ParseError(exc.message, offset=off + exc.offset, expected=exc.expected, line=no) from None


def parse_system(text):
    """Parse and validate a system-definition file."""
    section = None
    seen = {s: False for s in SECTIONS}
    name = dof = lagrangian = None
    params = {}
    singular = []
    for no, off, line in _logical_lines(text):
        header = _HEADER.match(line)
        if header:
            section = header.group(1)
            if section not in SECTIONS:
                raise ParseError(f"unknown section [{section}]", offset=off, line=no,
                                 expected={f"[{s}]" for s in SECTIONS})
            if seen[section]:
                raise ParseError(f"duplicate section [{section}]", offset=off, line=no)
            seen[section] = True
            continue
        if section is None:
            raise ParseError("content before the first section header", offset=off, line=no,
                             expected={f"[{s}]" for s in SECTIONS})
        kv = _KEYVAL.match(line)
        if section == "singular":
            if kv:
                label, body = kv.group(1), kv.group(2)
                body_off = off + line.index(body) if body else off
            else:
                label, body, body_off = f"locus{len(singular) + 1}", line, off
            singular.append((label, simplify(_expr_at(body, no, body_off))))
            continue
        if not kv:
            raise ParseError("expected 'key = value'", offset=off, line=no, expected={"key = value"})
        key, value = kv.group(1), kv.group(2)
        value_off = off + line.index("=") + 1 + (len(line.split("=", 1)[1]) - len(line.split("=", 1)[1].lstrip()))
        if section == "system":
            if key == "name":
                name = value.strip()
            elif key == "dof":
                try:
                    dof = int(value)
                except ValueError:
                    raise ParseError("dof must be an integer", offset=value_off, line=no,
                                     expected={"integer"}) from None
                if dof < 1:
                    raise ParseError("dof must be positive", offset=value_off, line=no,
                                     expected={"positive integer"})
            else:
                raise ParseError(f"unknown key {key!r} in [system]", offset=off, line=no,
                                 expected={"name", "dof"})
        elif section == "params":
            if key in params:
                raise ParseError(f"duplicate parameter {key!r}", offset=off, line=no)
            params[key] = _parse_number(value, no, value_off)
        elif section == "lagrangian":
            if key != "L":
                raise ParseError(f"unknown key {key!r} in [lagrangian]", offset=off, line=no, expected={"L"})
            if lagrangian is not None:
                raise ParseError("duplicate Lagrangian", offset=off, line=no)
            lagrangian = simplify(_expr_at(value, no, value_off))
    end = max(len(text.encode()) - 1, 0)
    if name is None:
        raise ParseError("missing 'name' in [system]", offset=end, expected={"name"})
    if dof is None:
        raise ParseError("missing 'dof' in [system]", offset=end, expected={"dof"})
    if lagrangian is None:
        raise ParseError("missing [lagrangian] 'L = ...'", offset=end, expected={"L"})
    spec = SystemSpec(name=name, dof=dof, params=params, lagrangian=lagrangian, singular=singular)
    validate_system(spec)
    return spec


def validate_system(spec):
    exprs = [("L", spec.lagrangian)] + list(spec.singular)
    for label, e in exprs:
        for s in free_symbols(e):
            if isinstance(s, Coord) and s.index > spec.dof:
                raise IndexOutOfRange(f"{label} uses {s.name} but dof = {spec.dof}")
            if isinstance(s, Param) and s.name not in spec.params:
                raise MissingParameter(f"{label} uses parameter {s.name!r} with no value in [params]")


def format_system(spec):
    lines = ["[system]", f"name = {spec.name}", f"dof = {spec.dof}", "", "[params]"]
    for k, v in spec.params.items():
        lines.append(f"{k} = {_decimal(v)}")
    lines += ["", "[lagrangian]", f"L = {print_expr(spec.lagrangian)}"]
    if spec.singular:
        lines += ["", "[singular]"]
        lines += [f"{label} = {print_expr(e)}" for label, e in spec.singular]
    return "\n".join(lines) + "\n"


def _decimal(q):
    q = Fraction(q)
    if q.denominator == 1:
        return str(q.numerator)
    return repr(float(q))


# ---------------------------------------------------------------------------
# key = value documents (equation dumps, reports)


def format_document(sections, comments=()):
    """``sections`` is a sequence of (name, [(key, value), ...])."""
    out = [f"# {c}" for c in comments]
    for name, items in sections:
        if out:
            out.append("")
        out.append(f"[{name}]")
        for key, value in items:
            value = str(value)
            if "\n" in value:
                raise ValueError(f"document values must be single-line: {key}")
            out.append(f"{key} = {value}")
    return "\n".join(out) + "\n"


def read_document(text):
    """Inverse of ``format_document``: {section: {key: value}} in file order."""
    doc = {}
    current = None
    for no, line in enumerate(text.split("\n"), 1):
        stripped = line.strip()
        if not stripped or stripped.startswith("#"):
            continue
        header = _HEADER.match(stripped)
        if header:
            current = doc.setdefault(header.group(1), {})
            continue
        key, sep, value = stripped.partition(" = ")
        if not sep or current is None:
            raise ParseError("expected 'key = value' inside a section", offset=0, line=no)
        current[key] = value
    return doc
