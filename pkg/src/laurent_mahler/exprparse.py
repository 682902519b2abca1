"""Recursive-descent parser for integer-coefficient polynomial expressions.

Grammar::

    expr   := ['+'|'-'] term (('+'|'-') term)*
    term   := factor ('*' factor)*
    factor := atom ['^' ['-'] INT]
    atom   := INT | NAME | '(' expr ')'

``NAME`` is an identifier optionally followed by a bracketed subscript, so
``x[n+3]`` and ``x1`` are both single names.  Which names are legal is
decided by the caller through ``resolve``.
"""
from __future__ import annotations

import re
from typing import Callable, Dict, List, Tuple

from .laurent import LaurentPoly


class ParseError(ValueError):
    def __init__(self, message: str, position: int, text: str = ""):
        self.position = position
        self.text = text
        pointer = f"\n  {text}\n  {' ' * position}^" if text else ""
        super().__init__(f"{message} at position {position}{pointer}")


_TOKEN_RE = re.compile(
    r"(?P<ws>\s+)|(?P<int>\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*(?:\[[^\]]*\])?)|(?P<op>[-+*^()=])")


def tokenize(text: str) -> List[Tuple[str, str, int]]:
    tokens = []
    pos = 0
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            raise ParseError(f"unexpected character {text[pos]!r}", pos, text)
        kind = m.lastgroup
        if kind != "ws":
            tokens.append((kind, m.group(), pos))
        pos = m.end()
    tokens.append(("end", "", len(text)))
    return tokens


class _Parser:
    def __init__(self, text: str, resolve: Callable[[str, int], int], nvars: int):
        self.text = text
        self.tokens = tokenize(text)
        self.i = 0
        self.resolve = resolve
        self.nvars = nvars

    def peek(self):
        return self.tokens[self.i]

    def take(self):
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect(self, value: str):
        kind, val, pos = self.take()
        if val != value:
            raise ParseError(f"expected {value!r}, found {val or 'end of input'!r}", pos, self.text)

    def expr(self) -> LaurentPoly:
        sign = 1
        kind, val, _ = self.peek()
        if val in "+-" and kind == "op":
            self.take()
            sign = -1 if val == "-" else 1
        result = self.term() * sign
        while True:
            kind, val, _ = self.peek()
            if kind == "op" and val in "+-":
                self.take()
                t = self.term()
                result = result + t if val == "+" else result - t
            else:
                return result

    def term(self) -> LaurentPoly:
        result = self.factor()
        while self.peek()[1] == "*":
            self.take()
            result = result * self.factor()
        return result

    def factor(self) -> LaurentPoly:
        base = self.atom()
        if self.peek()[1] == "^":
            self.take()
            neg = False
            if self.peek()[1] == "-":
                self.take()
                neg = True
            kind, val, pos = self.take()
            if kind != "int":
                raise ParseError("exponent must be an integer", pos, self.text)
            k = int(val)
            return base ** (-k if neg else k)
        return base

    def atom(self) -> LaurentPoly:
        kind, val, pos = self.take()
        if kind == "int":
            return LaurentPoly.constant(self.nvars, int(val))
        if kind == "name":
            idx = self.resolve(val, pos)
            return LaurentPoly.var(self.nvars, idx)
        if val == "(":
            inner = self.expr()
            self.expect(")")
            return inner
        raise ParseError(f"unexpected {val or 'end of input'!r}", pos, self.text)


def parse_expression(text: str, variables: Dict[str, int] | Callable[[str, int], int],
                     nvars: int) -> LaurentPoly:
    """Parse ``text`` into a :class:`LaurentPoly` in ``nvars`` variables."""
    if callable(variables):
        resolve = variables
    else:
        def resolve(name: str, pos: int) -> int:
            if name not in variables:
                raise ParseError(f"unknown variable {name!r}", pos, text)
            return variables[name]
    p = _Parser(text, resolve, nvars)
    result = p.expr()
    kind, val, pos = p.peek()
    if kind != "end":
        raise ParseError(f"unexpected {val!r}", pos, text)
    return result
