"""Tokenizer and recursive-descent parser for ``.rqc`` files.

Grammar (statements end with ``;``, ``#`` starts a comment)::

    file      := stmt+
    stmt      := wire | let | gate | slot | input | output | apply
    wire      := "wire" NAME ":" "[" INT ("," INT)* "]" ";"
    let       := "let" NAME "=" matrix ";"
    gate      := "gate" NAME ":" names "->" names "route" route "kraus" "@" PATH ";"
    slot      := "slot" NAME ":" names "->" names "route" route ";"
    input     := "input" names ";"
    output    := "output" names "route" route ";"
    apply     := "apply" NAME [ "(" names ")" ] ";"
    route     := atom ("|" atom)*
    atom      := "id" | "full" | NAME ["^" "T"] | matrix
    matrix    := "[" row ("," row)* "]"
    row       := "[" INT ("," INT)* "]"
    names     := NAME ("," NAME)*
"""
from __future__ import annotations

import os
import re
from dataclasses import dataclass

from .ast import (Apply, CircuitAST, GateDecl, LetDecl, Pos, RouteFull, RouteId,
                  RouteLiteral, RouteRef, RouteUnion, SlotDecl, WireDecl)

KEYWORDS = {"wire", "let", "gate", "slot", "input", "output", "apply", "route", "kraus"}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>\#[^\n]*)
  | (?P<arrow>->)
  | (?P<path>@[^\s;]+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<punct>[\[\],;:()=^|])
""", re.VERBOSE)


class ParseError(Exception):
    def __init__(self, message: str, pos: Pos, expected: tuple = ()):
        self.message = message
        self.pos = pos
        self.expected = tuple(expected)
        text = f"{pos}: {message}"
        if expected:
            text += f" (expected {', '.join(expected)})"
        super().__init__(text)


@dataclass(frozen=True)
class Token:
    kind: str   # name, int, path, punct, arrow, eof
    text: str
    pos: Pos


def tokenize(text: str) -> list:
    out = []
    line, col, i = 1, 1, 0
    while i < len(text):
        m = _TOKEN_RE.match(text, i)
        if not m:
            raise ParseError(f"unexpected character {text[i]!r}", Pos(line, col))
        kind = m.lastgroup
        s = m.group()
        if kind == "nl":
            line, col = line + 1, 1
        else:
            if kind not in ("ws", "comment"):
                out.append(Token(kind, s, Pos(line, col)))
            col += len(s)
        i = m.end()
    out.append(Token("eof", "", Pos(line, col)))
    return out


class Parser:
    def __init__(self, tokens: list, base_dir: str = "."):
        self.toks = tokens
        self.i = 0
        self.base_dir = base_dir

    # -- token helpers

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def _fail(self, expected: tuple, message: str | None = None):
        t = self.tok
        found = "end of file" if t.kind == "eof" else repr(t.text)
        raise ParseError(message or f"unexpected {found}", t.pos, expected)

    def eat(self, text: str) -> Token:
        t = self.tok
        if t.text != text or t.kind == "eof":
            self._fail((repr(text),))
        self.i += 1
        return t

    def maybe(self, text: str) -> bool:
        if self.tok.text == text and self.tok.kind != "eof":
            self.i += 1
            return True
        return False

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name" or t.text in KEYWORDS:
            self._fail(("name",))
        self.i += 1
        return t

    def integer(self) -> int:
        t = self.tok
        if t.kind != "int":
            self._fail(("integer",))
        self.i += 1
        return int(t.text)

    def names(self) -> list:
        out = [self.name()]
        while self.maybe(","):
            out.append(self.name())
        return out

    # -- grammar

    def matrix(self) -> RouteLiteral:
        self.eat("[")
        starts = [self.tok.pos]
        rows = [self.row()]
        while self.maybe(","):
            starts.append(self.tok.pos)
            rows.append(self.row())
        self.eat("]")
        width = len(rows[0])
        for r, pos in zip(rows, starts):
            if len(r) != width:
                raise ParseError("ragged route matrix", pos)
        return RouteLiteral(tuple(rows))

    def row(self) -> tuple:
        start = self.tok
        self.eat("[")
        vals = [self.integer()]
        while self.maybe(","):
            vals.append(self.integer())
        self.eat("]")
        if any(v not in (0, 1) for v in vals):
            raise ParseError("route entries must be 0 or 1", start.pos)
        return tuple(vals)

    def route_atom(self):
        t = self.tok
        if t.text == "id" and t.kind == "name":
            self.i += 1
            return RouteId()
        if t.text == "full" and t.kind == "name":
            self.i += 1
            return RouteFull()
        if t.text == "[":
            return self.matrix()
        if t.kind == "name" and t.text not in KEYWORDS:
            self.i += 1
            transposed = False
            if self.maybe("^"):
                if self.tok.text != "T":
                    self._fail(("'T'",))
                self.i += 1
                transposed = True
            return RouteRef(t.text, transposed, t.pos)
        self._fail(("'id'", "'full'", "route name", "matrix"))

    def route(self):
        expr = self.route_atom()
        while self.maybe("|"):
            expr = RouteUnion(expr, self.route_atom())
        return expr

    def parse(self) -> CircuitAST:
        wires, lets, gates, slots, layers = [], [], [], [], []
        inputs = outputs = out_route = None
        if self.tok.kind == "eof":
            self._fail(("'wire'",), "empty circuit")
        while self.tok.kind != "eof":
            t = self.tok
            kw = t.text if t.kind == "name" else None
            if kw == "wire":
                self.i += 1
                n = self.name()
                self.eat(":")
                self.eat("[")
                dims = [self.integer()]
                while self.maybe(","):
                    dims.append(self.integer())
                self.eat("]")
                if any(d < 1 for d in dims):
                    raise ParseError("sector dimensions must be positive", n.pos)
                wires.append(WireDecl(n.text, tuple(dims), n.pos))
            elif kw == "let":
                self.i += 1
                n = self.name()
                self.eat("=")
                lets.append(LetDecl(n.text, self.matrix(), n.pos))
            elif kw in ("gate", "slot"):
                self.i += 1
                n = self.name()
                self.eat(":")
                ins = self.names()
                if self.tok.kind != "arrow":
                    self._fail(("'->'",))
                self.i += 1
                outs = self.names()
                self.eat("route")
                r = self.route()
                if kw == "gate":
                    self.eat("kraus")
                    if self.tok.kind != "path":
                        self._fail(("'@' payload path",))
                    path = self.tok.text[1:]
                    self.i += 1
                    gates.append(GateDecl(n.text, tuple(x.text for x in ins),
                                          tuple(x.text for x in outs), r, path, n.pos))
                else:
                    slots.append(SlotDecl(n.text, tuple(x.text for x in ins),
                                          tuple(x.text for x in outs), r, n.pos))
            elif kw == "input":
                if inputs is not None:
                    raise ParseError("duplicate input statement", t.pos)
                self.i += 1
                inputs = self.names()
            elif kw == "output":
                if outputs is not None:
                    raise ParseError("duplicate output statement", t.pos)
                self.i += 1
                outputs = self.names()
                self.eat("route")
                out_route = self.route()
            elif kw == "apply":
                self.i += 1
                n = self.name()
                args = None
                if self.maybe("("):
                    args = self.names()
                    self.eat(")")
                layers.append((Apply(n.text, n.pos), args))
            else:
                self._fail(("'wire'", "'let'", "'gate'", "'slot'", "'input'", "'output'", "'apply'"))
            self.eat(";")
        if inputs is None:
            raise ParseError("missing input statement", self.tok.pos)
        if outputs is None:
            raise ParseError("missing output statement", self.tok.pos)
        ast = CircuitAST(tuple(wires), tuple(lets), tuple(gates), tuple(slots),
                         tuple(x.text for x in inputs), tuple(x.text for x in outputs),
                         out_route, tuple(a for a, _ in layers), self.base_dir)
        _resolve(ast, inputs, outputs, layers)
        return ast


def _resolve(ast: CircuitAST, inputs, outputs, layers):
    """Name resolution: duplicates, unknown references, slot usage."""
    seen = {}
    for w in ast.wires:
        if w.name in seen:
            raise ParseError(f"duplicate wire {w.name!r}", w.pos)
        seen[w.name] = w
    lets = {}
    for l in ast.lets:
        if l.name in lets or l.name in ("id", "full"):
            raise ParseError(f"duplicate route name {l.name!r}", l.pos)
        lets[l.name] = l
    nodes = {}
    for n in ast.gates + ast.slots:
        if n.name in nodes:
            raise ParseError(f"duplicate node {n.name!r}", n.pos)
        nodes[n.name] = n
        for w in n.ins + n.outs:
            if w not in seen:
                raise ParseError(f"unknown wire {w!r} in {n.name!r}", n.pos)
        for ref in _refs(n.route):
            if ref.name not in lets:
                raise ParseError(f"unknown route {ref.name!r}", ref.pos)
    for ref in _refs(ast.output_route):
        if ref.name not in lets:
            raise ParseError(f"unknown route {ref.name!r}", ref.pos)
    for t in list(inputs) + list(outputs):
        if t.text not in seen:
            raise ParseError(f"unknown wire {t.text!r}", t.pos)
    used = {}
    for a, args in layers:
        if a.name not in nodes:
            raise ParseError(f"unknown node {a.name!r}", a.pos)
        if args is not None and tuple(x.text for x in args) != nodes[a.name].ins:
            raise ParseError(f"arguments of {a.name!r} must be {', '.join(nodes[a.name].ins)}", a.pos)
        used[a.name] = used.get(a.name, 0) + 1
    for s in ast.slots:
        if used.get(s.name, 0) != 1:
            raise ParseError(f"slot {s.name!r} must be applied exactly once", s.pos)


def _refs(expr):
    if isinstance(expr, RouteRef):
        yield expr
    elif isinstance(expr, RouteUnion):
        yield from _refs(expr.left)
        yield from _refs(expr.right)


def parse(text: str, base_dir: str = ".") -> CircuitAST:
    return Parser(tokenize(text), base_dir).parse()


def parse_file(path: str) -> CircuitAST:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse(text, os.path.dirname(os.path.abspath(path)))
