"""Tiny operator-expression language.

    expr   := term (("+" | "-") term)*
    term   := unary ("*" unary)*
    unary  := ("+" | "-") unary | atom
    atom   := NUMBER | NAME | "(" expr ")"

Names resolve to operators in a caller-supplied environment; ``Id`` is always
the identity. Numbers may carry a ``j`` suffix for imaginary scalars. A bare
scalar in a sum stands for scalar * Id.
"""
from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .hilbert import DenseOperator, SpaceDescriptor, boson_operators, spin_ladder, spin_operators

_TOKEN = re.compile(r"\s*(?:(?P<num>(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?j?)|(?P<name>[A-Za-z_]\w*)|(?P<op>[-+*()]))")


class ExpressionError(ValidationError):
    def __init__(self, message, position):
        super().__init__(f"{message} at position {position}")
        self.position = position


@dataclass
class _Tok:
    kind: str
    text: str
    pos: int


def tokenize(text: str) -> list:
    toks, pos = [], 0
    while pos < len(text):
        if text[pos:].strip() == "":
            break
        m = _TOKEN.match(text, pos)
        if not m:
            skip = len(text[pos:]) - len(text[pos:].lstrip())
            raise ExpressionError(f"unexpected character {text[pos + skip]!r}", pos + skip)
        kind = m.lastgroup
        start = m.start(kind)
        toks.append(_Tok(kind, m.group(kind), start))
        pos = m.end()
    toks.append(_Tok("end", "", len(text)))
    return toks


class _Parser:
    def __init__(self, text, env, space):
        self.toks = tokenize(text)
        self.i = 0
        self.env = env
        self.space = space

    def peek(self):
        return self.toks[self.i]

    def take(self):
        t = self.toks[self.i]
        self.i += 1
        return t

    def parse(self):
        if self.peek().kind == "end":
            raise ExpressionError("empty expression", 0)
        v = self.expr()
        t = self.peek()
        if t.kind != "end":
            raise ExpressionError(f"unexpected {t.text!r}", t.pos)
        return v

    def expr(self):
        v = self.term()
        while self.peek().kind == "op" and self.peek().text in "+-":
            op = self.take().text
            w = self.term()
            v = _add(v, w if op == "+" else _neg(w), self.space)
        return v

    def term(self):
        v = self.unary()
        while self.peek().kind == "op" and self.peek().text == "*":
            self.take()
            v = _mul(v, self.unary())
        return v

    def unary(self):
        t = self.peek()
        if t.kind == "op" and t.text in "+-":
            self.take()
            v = self.unary()
            return v if t.text == "+" else _neg(v)
        return self.atom()

    def atom(self):
        t = self.take()
        if t.kind == "num":
            return complex(t.text) if t.text.endswith("j") else float(t.text)
        if t.kind == "name":
            if t.text == "Id":
                return DenseOperator.identity(self.space)
            if t.text not in self.env:
                raise ExpressionError(f"unknown operator {t.text!r}", t.pos)
            return self.env[t.text]
        if t.kind == "op" and t.text == "(":
            v = self.expr()
            close = self.take()
            if close.kind != "op" or close.text != ")":
                raise ExpressionError("expected ')'", close.pos)
            return v
        if t.kind == "end":
            raise ExpressionError("unexpected end of expression", t.pos)
        raise ExpressionError(f"unexpected {t.text!r}", t.pos)


def _neg(v):
    return -v


def _add(v, w, space):
    if isinstance(v, DenseOperator) or isinstance(w, DenseOperator):
        eye = DenseOperator.identity(space)
        v = v if isinstance(v, DenseOperator) else v * eye
        w = w if isinstance(w, DenseOperator) else w * eye
    return v + w


def _mul(v, w):
    if isinstance(v, DenseOperator) and isinstance(w, DenseOperator):
        return v @ w
    return v * w


def parse_operator(text: str, env: dict, space: SpaceDescriptor) -> DenseOperator:
    """Evaluate ``text`` to an operator on ``space``."""
    v = _Parser(text, env, space).parse()
    if not isinstance(v, DenseOperator):
        v = v * DenseOperator.identity(space)
    return v


def split_product(text: str) -> tuple:
    """Split ``A*B`` at its first top-level ``*`` into (A, B).

    Expressions that are not a plain product at top level (a sum, a single
    factor) come back as (text, "Id").
    """
    toks = tokenize(text)
    depth, star = 0, None
    for k, t in enumerate(toks):
        if t.kind != "op":
            continue
        if t.text == "(":
            depth += 1
        elif t.text == ")":
            depth -= 1
        elif depth == 0 and t.text in "+-" and k > 0 and not (toks[k - 1].kind == "op" and toks[k - 1].text in "+-*("):
            return text, "Id"
        elif depth == 0 and t.text == "*" and star is None:
            star = t.pos
    if star is None:
        return text, "Id"
    return text[:star].strip(), text[star + 1:].strip()


def spin_environment(two_s: int, hbar: float = 1.0) -> dict:
    sx, sy, sz = spin_operators(two_s, hbar)
    sp, sm = spin_ladder(two_s, hbar)
    return {"Sx": sx, "Sy": sy, "Sz": sz, "Sp": sp, "Sm": sm}


def boson_environment(ncut: int, hbar: float = 1.0, omega: float = 1.0) -> dict:
    a, ad, q, p = boson_operators(ncut, hbar, omega)
    return {"a": a, "adag": ad, "q": q, "p": p, "n": ad @ a}
