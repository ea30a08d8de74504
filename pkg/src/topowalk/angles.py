"""Parser for angle literals such as ``pi/3``, ``2pi/5``, ``-pi/2`` or ``3/4``.

Grammar::

    expr   := term (('+' | '-') term)*
    term   := factor (('*' | '/') factor | atom)*     # NUMBER followed by 'pi' or '(' multiplies
    factor := ('+' | '-') factor | atom
    atom   := NUMBER | 'pi' | '(' expr ')'
"""

from __future__ import annotations

import math
import re

__all__ = ["parse_angle", "parse_angle_list"]

_TOKEN = re.compile(r"\s*(?:(\d+\.?\d*(?:[eE][-+]?\d+)?|\.\d+(?:[eE][-+]?\d+)?)|(pi|π)|([-+*/()]))")


def _tokenize(text):
    pos, out = 0, []
    text = text.strip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise ValueError(f"cannot parse angle {text!r} near position {pos}")
        num, pi, op = m.groups()
        if num is not None:
            out.append(("num", float(num)))
        elif pi is not None:
            out.append(("pi", math.pi))
        else:
            out.append(("op", op))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, tokens, text):
        self.t = tokens
        self.i = 0
        self.text = text

    def peek(self):
        return self.t[self.i] if self.i < len(self.t) else (None, None)

    def take(self):
        tok = self.peek()
        self.i += 1
        return tok

    def fail(self):
        raise ValueError(f"cannot parse angle {self.text!r}")

    def expr(self):
        v = self.term()
        while self.peek() in (("op", "+"), ("op", "-")):
            op = self.take()[1]
            w = self.term()
            v = v + w if op == "+" else v - w
        return v

    def term(self):
        v = self.factor()
        while True:
            kind, val = self.peek()
            if (kind, val) in (("op", "*"), ("op", "/")):
                self.take()
                w = self.factor()
                if val == "/":
                    if w == 0:
                        raise ValueError(f"division by zero in angle {self.text!r}")
                    v = v / w
                else:
                    v = v * w
            elif (kind == "pi" or (kind, val) == ("op", "(")) and self.t[self.i - 1][0] == "num":
                v = v * self.atom()
            else:
                return v

    def factor(self):
        kind, val = self.peek()
        if (kind, val) == ("op", "-"):
            self.take()
            return -self.factor()
        if (kind, val) == ("op", "+"):
            self.take()
            return self.factor()
        return self.atom()

    def atom(self):
        kind, val = self.take()
        if kind in ("num", "pi"):
            return val
        if (kind, val) == ("op", "("):
            v = self.expr()
            if self.take() != ("op", ")"):
                self.fail()
            return v
        self.fail()


def parse_angle(text) -> float:
    """Evaluate an angle literal; plain numbers pass through."""
    if isinstance(text, (int, float)):
        return float(text)
    tokens = _tokenize(str(text))
    if not tokens:
        raise ValueError("empty angle literal")
    p = _Parser(tokens, text)
    v = p.expr()
    if p.i != len(tokens):
        p.fail()
    if not math.isfinite(v):
        raise ValueError(f"angle {text!r} is not finite")
    return float(v)


def parse_angle_list(text, count: int | None = None) -> tuple:
    """Comma-separated angle literals, optionally of a fixed length."""
    if isinstance(text, (list, tuple)):
        items = list(text)
    else:
        items = [s for s in str(text).split(",")]
    values = tuple(parse_angle(s) for s in items)
    if count is not None and len(values) != count:
        raise ValueError(f"expected {count} comma-separated values, got {len(values)}")
    return values
