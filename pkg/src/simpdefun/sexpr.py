"""Reader and printer for the s-expression surface syntax.

An s-expression is an ``int``, a :class:`Sym`, or a ``tuple`` of
s-expressions.  Symbols are case-insensitive and stored upper-case.
``'x`` reads as ``(QUOTE x)`` and ``(QUOTE x)`` prints back as ``'x``.
"""

from __future__ import annotations

import re
from typing import Iterator, Union

SExpr = Union[int, "Sym", tuple]

_INT_RE = re.compile(r"[+-]?\d+\Z")
_DELIMS = set("();'")
_ILLEGAL = set('"`,#|\\')


class Sym(str):
    """An interned-by-value, upper-cased symbol."""

    __slots__ = ()

    def __new__(cls, name: str) -> "Sym":
        return super().__new__(cls, name.upper())

    def __repr__(self) -> str:
        return f"Sym({str.__repr__(self)})"

    @property
    def is_keyword(self) -> bool:
        return self.startswith(":")


QUOTE = Sym("QUOTE")


class ParseError(ValueError):
    def __init__(self, message: str, offset: int, text: str = ""):
        self.offset = offset
        self.line = text.count("\n", 0, offset) + 1
        self.column = offset - (text.rfind("\n", 0, offset) + 1) + 1
        super().__init__(f"{message} at offset {offset} (line {self.line}, column {self.column})")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip(self) -> None:
        text, n = self.text, len(self.text)
        while self.pos < n:
            c = text[self.pos]
            if c == ";":
                end = text.find("\n", self.pos)
                self.pos = n if end < 0 else end + 1
            elif c.isspace():
                self.pos += 1
            else:
                return

    def at_end(self) -> bool:
        self.skip()
        return self.pos >= len(self.text)

    def read(self) -> SExpr:
        self.skip()
        text = self.text
        if self.pos >= len(text):
            raise ParseError("unexpected end of input", self.pos, text)
        c = text[self.pos]
        if c == "(":
            self.pos += 1
            items = []
            while True:
                self.skip()
                if self.pos >= len(text):
                    raise ParseError("unclosed list", self.pos, text)
                if text[self.pos] == ")":
                    self.pos += 1
                    return tuple(items)
                items.append(self.read())
        if c == ")":
            raise ParseError("unbalanced ')'", self.pos, text)
        if c == "'":
            self.pos += 1
            return (QUOTE, self.read())
        return self.read_atom()

    def read_atom(self) -> SExpr:
        text, start = self.text, self.pos
        while self.pos < len(text):
            c = text[self.pos]
            if c.isspace() or c in _DELIMS:
                break
            if c in _ILLEGAL:
                raise ParseError(f"illegal character {c!r}", self.pos, text)
            self.pos += 1
        token = text[start:self.pos]
        if _INT_RE.match(token):
            return int(token)
        return Sym(token)


def parse_sexprs(text: str) -> list[SExpr]:
    """Read every top-level form in ``text``."""
    return [form for form, _ in iter_forms(text)]


def iter_forms(text: str) -> Iterator[tuple[SExpr, int]]:
    """Yield ``(form, line)`` for each top-level form."""
    reader = _Reader(text)
    while not reader.at_end():
        line = text.count("\n", 0, reader.pos) + 1
        yield reader.read(), line


def parse_sexpr(text: str) -> SExpr:
    forms = parse_sexprs(text)
    if len(forms) != 1:
        raise ParseError(f"expected exactly one form, found {len(forms)}", 0, text)
    return forms[0]


def to_str(x: SExpr) -> str:
    if isinstance(x, tuple):
        if len(x) == 2 and x[0] == QUOTE:
            return "'" + to_str(x[1])
        return "(" + " ".join(to_str(e) for e in x) + ")"
    if isinstance(x, bool):
        raise TypeError("booleans are not s-expressions")
    return str(x)


# Forms whose first N arguments stay on the head line when breaking.
_HEAD_ARGS = {"DEFUN": 2, "DEFTHM": 1, "DEFTHMD": 1, "IF": 1, "LAMBDA": 1}


def pformat(x: SExpr, width: int = 78, indent: int = 0) -> str:
    """Pretty-print ``x`` so that lines stay within ``width`` where possible."""
    flat = to_str(x)
    if len(flat) + indent <= width or not isinstance(x, tuple) or not x:
        return flat
    if len(x) == 2 and x[0] == QUOTE:
        return "'" + pformat(x[1], width, indent + 1)
    head = x[0]
    if not isinstance(head, tuple):
        keep = _HEAD_ARGS.get(str(head), 0) if isinstance(head, Sym) else 0
        first = "(" + to_str(head)
        parts = [first]
        col = indent + len(first) + 1
        for arg in x[1:1 + keep]:
            text = pformat(arg, width, col)
            parts.append(" " + text)
            col += len(text) + 1
        rest = x[1 + keep:]
        if keep:
            sub = indent + 2
        else:
            sub = indent + len(first) + 1
            if rest:
                text = pformat(rest[0], width, sub)
                parts.append(" " + text)
                rest = rest[1:]
        for arg in rest:
            parts.append("\n" + " " * sub + pformat(arg, width, sub))
        return "".join(parts) + ")"
    sub = indent + 1
    body = ("\n" + " " * sub).join(pformat(e, width, sub) for e in x)
    return "(" + body + ")"
