"""Recursive-descent parser for the concrete formula syntax.

Grammar::

    formula := quant | iff
    quant   := ("forall" | "exists") IDENT "." formula
    iff     := imp {"<->" imp}
    imp     := or {"->" or}
    or      := and {"|" and}
    and     := unary {"&" unary}
    unary   := "!" unary | "(" formula ")" | atom
    atom    := IDENT "(" [IDENT {"," IDENT}] ")"
             | IDENT ("=" | "<" | "<c" | "<b") (IDENT | NUMBER)

The infix orders bind to the relations ``lt``, ``ordc`` and ``ordb``.  A
number on the right-hand side is only meaningful with ``=``.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

from .syntax import (And, Atom, ConstEq, Eq, Exists, Forall, Formula, Iff,
                     Implies, Not, Or)

__all__ = ["FormulaSyntaxError", "parse"]

KEYWORDS = {"forall", "exists"}
ORDERS = {"<": "lt", "<c": "ordc", "<b": "ordb"}

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<op><->|->|<[cb](?![A-Za-z0-9_'])|<|=|!|&|\||\(|\)|,|\.)
  | (?P<num>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_']*)
""", re.VERBOSE)


class FormulaSyntaxError(ValueError):
    def __init__(self, message: str, text: str, pos: int):
        line = text.count("\n", 0, pos) + 1
        col = pos - (text.rfind("\n", 0, pos) + 1) + 1
        super().__init__(f"{message} at line {line}, column {col}")
        self.line = line
        self.column = col
        self.pos = pos


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def _tokenize(text: str) -> list[_Tok]:
    toks = []
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if m is None:
            sym = re.match(r"\S+", text[pos:]).group(0)
            raise FormulaSyntaxError(f"unknown infix symbol {sym!r}", text, pos)
        kind = m.lastgroup
        if kind != "ws":
            word = m.group(0)
            if kind == "ident" and word in KEYWORDS:
                kind = "kw"
            toks.append(_Tok(kind, word, pos))
        pos = m.end()
    toks.append(_Tok("eof", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0

    @property
    def tok(self) -> _Tok:
        return self.toks[self.i]

    def error(self, message: str, tok: _Tok | None = None):
        tok = tok or self.tok
        where = "end of input" if tok.kind == "eof" else repr(tok.text)
        raise FormulaSyntaxError(f"{message}, found {where}", self.text, tok.pos)

    def accept(self, text: str) -> bool:
        if self.tok.kind in ("op", "kw") and self.tok.text == text:
            self.i += 1
            return True
        return False

    def expect(self, text: str):
        if not self.accept(text):
            self.error(f"expected {text!r}")

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error("expected an identifier")
        name = self.tok.text
        self.i += 1
        return name

    def formula(self) -> Formula:
        if self.tok.kind == "kw":
            cls = Forall if self.tok.text == "forall" else Exists
            self.i += 1
            var = self.ident()
            self.expect(".")
            return cls(var, self.formula())
        return self.binary(0)

    _LEVELS = (("<->", Iff), ("->", Implies), ("|", Or), ("&", And))

    def binary(self, level: int) -> Formula:
        if level == len(self._LEVELS):
            return self.unary()
        sym, cls = self._LEVELS[level]
        left = self.binary(level + 1)
        while self.accept(sym):
            left = cls(left, self.binary(level + 1))
        return left

    def unary(self) -> Formula:
        if self.accept("!"):
            return Not(self.unary())
        if self.accept("("):
            f = self.formula()
            self.expect(")")
            return f
        return self.atom()

    def atom(self) -> Formula:
        name = self.ident()
        if self.accept("("):
            args = []
            if not self.accept(")"):
                args.append(self.ident())
                while self.accept(","):
                    args.append(self.ident())
                self.expect(")")
            return Atom(name, args)
        tok = self.tok
        if tok.kind != "op" or tok.text not in ("=", *ORDERS):
            self.error("expected a relation operator")
        self.i += 1
        rhs = self.tok
        if rhs.kind == "num":
            if tok.text != "=":
                self.error(f"a number may only follow '=', not {tok.text!r}", rhs)
            self.i += 1
            return ConstEq(name, int(rhs.text))
        other = self.ident()
        if tok.text == "=":
            return Eq(name, other)
        return Atom(ORDERS[tok.text], (name, other))


def parse(text: str) -> Formula:
    p = _Parser(text)
    f = p.formula()
    if p.tok.kind != "eof":
        p.error("unexpected trailing input")
    return f
