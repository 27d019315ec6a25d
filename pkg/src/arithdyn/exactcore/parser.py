"""Parser for integer polynomial expressions.

Grammar (whitespace insignificant, implicit multiplication rejected)::

    expr   := term (('+' | '-') term)*
    term   := unary ('*' unary)*
    unary  := ('+' | '-') unary | power
    power  := atom (('^' | '**') INT)?
    atom   := INT | IDENT | '(' expr ')'
"""
from __future__ import annotations

import re

from ..errors import ParseError
from .polys import HomogeneousForm, IntPolynomial

_TOKEN = re.compile(r"\s*(?:(\d+)|([A-Za-z_][A-Za-z_0-9]*)|(.))", re.S)


def _tokenize(text: str):
    tokens = []
    pos = 0
    line, line_start = 1, 0
    n = len(text)
    while pos < n:
        ch = text[pos]
        if ch == "\n":
            line += 1
            line_start = pos + 1
            pos += 1
            continue
        if ch.isspace():
            pos += 1
            continue
        col = pos - line_start + 1
        m = _TOKEN.match(text, pos)
        num, ident, other = m.groups()
        if num is not None:
            tokens.append(("INT", int(num), line, col))
        elif ident is not None:
            tokens.append(("IDENT", ident, line, col))
        elif other == "*" and text.startswith("**", pos):
            tokens.append(("^", "**", line, col))
            pos = m.end() + 1
            continue
        elif other in "+-*^()":
            tokens.append((other, other, line, col))
        else:
            raise ParseError(f"unexpected character {other!r}", line, col)
        pos = m.end()
    tokens.append(("EOF", None, line, pos - line_start + 1))
    return tokens


class _Poly(dict):
    """Sparse polynomial: exponent tuple -> nonzero int."""

    @staticmethod
    def const(nv, c):
        p = _Poly()
        if c:
            p[(0,) * nv] = c
        return p

    def add(self, other, sign=1):
        out = _Poly(self)
        for e, c in other.items():
            v = out.get(e, 0) + sign * c
            if v:
                out[e] = v
            else:
                out.pop(e, None)
        return out

    def mul(self, other):
        out = _Poly()
        for e1, c1 in self.items():
            for e2, c2 in other.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                v = out.get(e, 0) + c1 * c2
                if v:
                    out[e] = v
                else:
                    out.pop(e, None)
        return out


class _Parser:
    def __init__(self, text, variables):
        self.tokens = _tokenize(text)
        self.i = 0
        self.variables = list(variables)
        self.index = {v: k for k, v in enumerate(self.variables)}
        self.nv = len(self.variables)

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        t = self.tokens[self.i]
        self.i += 1
        return t

    def fail(self, msg, tok=None):
        tok = tok or self.peek()
        raise ParseError(msg, tok[2], tok[3])

    def parse(self):
        if self.peek()[0] == "EOF":
            self.fail("empty expression")
        p = self.expr()
        tok = self.peek()
        if tok[0] != "EOF":
            if tok[0] in ("INT", "IDENT", "("):
                self.fail("implicit multiplication is not allowed; use '*'")
            self.fail(f"unexpected token {tok[1]!r}")
        return p

    def expr(self):
        p = self.term()
        while self.peek()[0] in "+-" and self.peek()[0] != "EOF":
            op = self.take()[0]
            q = self.term()
            p = p.add(q, 1 if op == "+" else -1)
        return p

    def term(self):
        p = self.unary()
        while self.peek()[0] == "*":
            self.take()
            p = p.mul(self.unary())
        return p

    def unary(self):
        kind = self.peek()[0]
        if kind in ("+", "-"):
            self.take()
            p = self.unary()
            return p if kind == "+" else _Poly().add(p, -1)
        return self.power()

    def power(self):
        base = self.atom()
        if self.peek()[0] == "^":
            self.take()
            tok = self.peek()
            if tok[0] != "INT":
                self.fail("exponent must be a nonnegative integer literal")
            self.take()
            k = tok[1]
            if k > 10**4:
                self.fail("exponent too large", tok)
            result = _Poly.const(self.nv, 1)
            b = base
            while k:
                if k & 1:
                    result = result.mul(b)
                b = b.mul(b)
                k >>= 1
            return result
        return base

    def atom(self):
        tok = self.peek()
        kind = tok[0]
        if kind == "INT":
            self.take()
            return _Poly.const(self.nv, tok[1])
        if kind == "IDENT":
            self.take()
            if tok[1] not in self.index:
                self.fail(f"unknown variable {tok[1]!r} (expected one of {', '.join(self.variables)})", tok)
            e = [0] * self.nv
            e[self.index[tok[1]]] = 1
            p = _Poly()
            p[tuple(e)] = 1
            return p
        if kind == "(":
            self.take()
            p = self.expr()
            if self.peek()[0] != ")":
                self.fail("expected ')'")
            self.take()
            return p
        if kind == "EOF":
            self.fail("unexpected end of input")
        self.fail(f"unexpected token {tok[1]!r}")


def parse_polynomial(text: str, variables) -> dict:
    """Parse into a sparse map ``exponent tuple -> int`` over ``variables``."""
    if not isinstance(text, str):
        raise ParseError("polynomial must be given as a string", 1, 1)
    return dict(_Parser(text, variables).parse())


def parse_form(text: str, variables, degree: int | None = None, homogenize: bool = False) -> HomogeneousForm:
    """Parse a homogeneous form.

    With ``homogenize=True`` a non-homogeneous input is homogenized with the
    last variable (up to ``degree`` if given, else its total degree).
    """
    terms = parse_polynomial(text, variables)
    nv = len(variables)
    degs = {sum(e) for e in terms}
    top = max(degs, default=0)
    if degree is None:
        degree = top
    if len(degs) > 1 or (degs and degree != top):
        if not homogenize:
            raise ParseError(f"expression is not homogeneous of degree {degree}: {text.strip()}", 1, 1)
        if top > degree:
            raise ParseError(f"expression has degree {top} above {degree}", 1, 1)
        terms = {e[:-1] + (e[-1] + degree - sum(e),): c for e, c in terms.items()}
    return HomogeneousForm(nv, degree, terms)


def parse_univariate(text: str, var: str = "x") -> IntPolynomial:
    terms = parse_polynomial(text, [var])
    if not terms:
        return IntPolynomial()
    top = max(e[0] for e in terms)
    cs = [0] * (top + 1)
    for (k,), c in terms.items():
        cs[k] = c
    return IntPolynomial(cs)


def parse_point(text: str):
    """Parse ``"a:b[:c...]"`` with integer or rational (``p/q``) entries."""
    from fractions import Fraction

    parts = text.split(":")
    if len(parts) < 2:
        raise ParseError("a projective point needs at least two ':'-separated coordinates", 1, 1)
    out = []
    col = 1
    for part in parts:
        s = part.strip()
        try:
            if not re.fullmatch(r"[+-]?\d+(/\d+)?", s):
                raise ValueError
            out.append(Fraction(s))
        except (ValueError, ZeroDivisionError):
            raise ParseError(f"bad coordinate {part!r}", 1, col) from None
        col += len(part) + 1
    return tuple(out)
