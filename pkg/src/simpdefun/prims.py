"""Built-in functions: arities and total (completed) semantics."""

from __future__ import annotations

from .sexpr import Sym
from .terms import NIL, T, Pair, Value, truthy, values_equal


def _bool(b: bool) -> Sym:
    return T if b else NIL


def _fix(v: Value) -> int:
    # non-integers act as 0 in arithmetic
    return v if type(v) is int else 0


def _car(x):
    return x.car if isinstance(x, Pair) else NIL


def _cdr(x):
    return x.cdr if isinstance(x, Pair) else NIL


def _true_listp(x) -> Sym:
    while isinstance(x, Pair):
        x = x.cdr
    return _bool(x == NIL and isinstance(x, Sym))


def _len(x) -> int:
    n = 0
    while isinstance(x, Pair):
        n += 1
        x = x.cdr
    return n


def _nth(n, x):
    n = n if type(n) is int and n > 0 else 0
    while n > 0 and isinstance(x, Pair):
        x = x.cdr
        n -= 1
    return _car(x)


def _append(x, y):
    items = []
    while isinstance(x, Pair):
        items.append(x.car)
        x = x.cdr
    for item in reversed(items):
        y = Pair(item, y)
    return y


def _signed_byte_p(bits, x) -> Sym:
    if type(bits) is not int or bits <= 0 or type(x) is not int:
        return NIL
    bound = 1 << (bits - 1)
    return _bool(-bound <= x < bound)


def _implies(p, q) -> Sym:
    return _bool(not truthy(p) or truthy(q))


# name -> (arity, implementation); IF is handled lazily by the evaluator
PRIMITIVES = {
    Sym("CONS"): (2, Pair),
    Sym("CAR"): (1, _car),
    Sym("CDR"): (1, _cdr),
    Sym("CONSP"): (1, lambda x: _bool(isinstance(x, Pair))),
    Sym("EQUAL"): (2, lambda x, y: _bool(values_equal(x, y))),
    Sym("NOT"): (1, lambda x: _bool(not truthy(x))),
    Sym("IMPLIES"): (2, _implies),
    Sym("BINARY-+"): (2, lambda x, y: _fix(x) + _fix(y)),
    Sym("BINARY-*"): (2, lambda x, y: _fix(x) * _fix(y)),
    Sym("UNARY--"): (1, lambda x: -_fix(x)),
    Sym("<"): (2, lambda x, y: _bool(_fix(x) < _fix(y))),
    Sym("ZP"): (1, lambda x: _bool(not (type(x) is int and x > 0))),
    Sym("NATP"): (1, lambda x: _bool(type(x) is int and x >= 0)),
    Sym("ENDP"): (1, lambda x: _bool(not isinstance(x, Pair))),
    Sym("TRUE-LISTP"): (1, _true_listp),
    Sym("NTH"): (2, _nth),
    Sym("LEN"): (1, _len),
    Sym("APPEND"): (2, _append),
    Sym("SIGNED-BYTE-P"): (2, _signed_byte_p),
}

IF_ARITY = 3

# primitives whose result is always T or NIL
BOOLEAN_PRIMITIVES = frozenset(
    Sym(n) for n in ("CONSP", "EQUAL", "NOT", "IMPLIES", "<", "ZP", "NATP",
                     "ENDP", "TRUE-LISTP", "SIGNED-BYTE-P"))


def primitive_arity(fn: Sym) -> int | None:
    if fn == "IF":
        return IF_ARITY
    entry = PRIMITIVES.get(fn)
    return entry[0] if entry else None
