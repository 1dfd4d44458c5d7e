"""Translated terms, runtime values and purely syntactic term utilities."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Mapping, Union

from .sexpr import QUOTE, SExpr, Sym

T = Sym("T")
NIL = Sym("NIL")
IF = Sym("IF")
NOT = Sym("NOT")
IMPLIES = Sym("IMPLIES")
EQUAL = Sym("EQUAL")


@dataclass(frozen=True, eq=False)
class Pair:
    car: "Value"
    cdr: "Value"

    # iterative, so long lists do not exhaust the Python stack
    def __eq__(self, other):
        if not isinstance(other, Pair):
            return NotImplemented
        return values_equal(self, other)

    def __hash__(self):
        h, n, v = 17, 0, self
        while isinstance(v, Pair) and n < 64:
            h = hash((h, v.car if not isinstance(v.car, Pair) else n))
            v = v.cdr
            n += 1
        return hash((h, v if not isinstance(v, Pair) else n))


def values_equal(a, b) -> bool:
    stack = [(a, b)]
    while stack:
        x, y = stack.pop()
        if x is y:
            continue
        if isinstance(x, Pair):
            if not isinstance(y, Pair):
                return False
            stack.append((x.cdr, y.cdr))
            stack.append((x.car, y.car))
        elif isinstance(y, Pair) or type(x) is not type(y) or x != y:
            return False
    return True


Value = Union[int, Sym, Pair]


@dataclass(frozen=True)
class Var:
    name: Sym


@dataclass(frozen=True)
class Const:
    value: Value


@dataclass(frozen=True)
class App:
    fn: Sym
    args: tuple

    def __post_init__(self):
        if type(self.args) is not tuple:
            object.__setattr__(self, "args", tuple(self.args))


Term = Union[Var, Const, App]
Path = tuple  # of int

TRUE = Const(T)
FALSE = Const(NIL)


class InvalidPosition(IndexError):
    pass


class NotRepresentable(ValueError):
    """A value (an improper list) that has no s-expression spelling."""


def truthy(v: Value) -> bool:
    return not (isinstance(v, Sym) and v == NIL)


def from_list(items, tail: Value = NIL) -> Value:
    out = tail
    for item in reversed(list(items)):
        out = Pair(item, out)
    return out


# --- values <-> s-expressions ------------------------------------------------

def value_to_sexpr(v: Value) -> SExpr:
    if isinstance(v, Pair):
        items = []
        while isinstance(v, Pair):
            items.append(value_to_sexpr(v.car))
            v = v.cdr
        if not (isinstance(v, Sym) and v == NIL):
            raise NotRepresentable("improper list")
        return tuple(items)
    return v


def sexpr_to_value(x: SExpr) -> Value:
    if isinstance(x, tuple):
        return from_list(sexpr_to_value(e) for e in x)
    return x


def format_value(v: Value) -> str:
    """Display form of a value, using dotted notation where needed."""
    if isinstance(v, Pair):
        parts = []
        while isinstance(v, Pair):
            parts.append(format_value(v.car))
            v = v.cdr
        if isinstance(v, Sym) and v == NIL:
            return "(" + " ".join(parts) + ")"
        return "(" + " ".join(parts) + " . " + format_value(v) + ")"
    return str(v)


# --- raw (translated) spelling -------------------------------------------------

def term_to_sexpr(t: Term) -> SExpr:
    """Print a term in translated form: constants quoted, no sugar."""
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return (QUOTE, value_to_sexpr(t.value))
    return (t.fn,) + tuple(term_to_sexpr(a) for a in t.args)


def term_from_sexpr(x: SExpr) -> Term:
    """Inverse of :func:`term_to_sexpr`; no arity or sugar processing."""
    if isinstance(x, Sym):
        return Var(x)
    if isinstance(x, int):
        return Const(x)
    if not x:
        raise ValueError("empty application")
    if x[0] == QUOTE:
        if len(x) != 2:
            raise ValueError("malformed QUOTE")
        return Const(sexpr_to_value(x[1]))
    if not isinstance(x[0], Sym):
        raise ValueError(f"bad function position: {x[0]!r}")
    return App(x[0], tuple(term_from_sexpr(a) for a in x[1:]))


# --- traversal ---------------------------------------------------------------

def subterm(t: Term, path: Path) -> Term:
    for i in path:
        if not isinstance(t, App) or not 0 <= i < len(t.args):
            raise InvalidPosition(f"no subterm at {tuple(path)}")
        t = t.args[i]
    return t


def replace_at(t: Term, path: Path, new: Term) -> Term:
    if not path:
        return new
    if not isinstance(t, App) or not 0 <= path[0] < len(t.args):
        raise InvalidPosition(f"no subterm at {tuple(path)}")
    i = path[0]
    args = list(t.args)
    args[i] = replace_at(args[i], path[1:], new)
    return App(t.fn, tuple(args))


def positions(t: Term, prefix: Path = ()) -> Iterator[tuple[Path, Term]]:
    """Pre-order walk yielding ``(path, subterm)``."""
    yield prefix, t
    if isinstance(t, App):
        for i, a in enumerate(t.args):
            yield from positions(a, prefix + (i,))


def size(t: Term) -> int:
    if isinstance(t, App):
        return 1 + sum(size(a) for a in t.args)
    return 1


def free_vars(t: Term) -> set:
    out: set = set()
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            out.add(u.name)
        elif isinstance(u, App):
            stack.extend(u.args)
    return out


def fns_called(t: Term) -> set:
    return {u.fn for _, u in positions(t) if isinstance(u, App)}


def instantiate(t: Term, subst: Mapping) -> Term:
    if isinstance(t, Var):
        return subst.get(t.name, t)
    if isinstance(t, Const):
        return t
    return App(t.fn, tuple(instantiate(a, subst) for a in t.args))


def rename_fns(t: Term, mapping: Mapping) -> Term:
    if isinstance(t, App):
        return App(mapping.get(t.fn, t.fn), tuple(rename_fns(a, mapping) for a in t.args))
    return t


def match(pattern: Term, t: Term, subst: dict | None = None) -> dict | None:
    """One-way matching; pattern variables bind, constants compare exactly."""
    subst = {} if subst is None else dict(subst)
    stack = [(pattern, t)]
    while stack:
        p, u = stack.pop()
        if isinstance(p, Var):
            bound = subst.get(p.name)
            if bound is None:
                subst[p.name] = u
            elif bound != u:
                return None
        elif isinstance(p, Const):
            if p != u:
                return None
        else:
            if not isinstance(u, App) or u.fn != p.fn or len(u.args) != len(p.args):
                return None
            stack.extend(zip(p.args, u.args))
    return subst


# --- governors and contexts -------------------------------------------------

def negate(t: Term) -> Term:
    if isinstance(t, App) and t.fn == NOT:
        return normalize_governor(t.args[0])
    return App(NOT, (t,))


def normalize_governor(t: Term) -> Term:
    # (not (not p)) has the same truth value as p
    while (isinstance(t, App) and t.fn == NOT and isinstance(t.args[0], App)
           and t.args[0].fn == NOT):
        t = t.args[0].args[0]
    return t


def conjuncts(t: Term) -> list:
    """Split an ``and``-nest ``(if a b 'nil)`` into its conjuncts."""
    t = normalize_governor(t)
    if isinstance(t, App) and t.fn == IF and t.args[2] == FALSE:
        return conjuncts(t.args[0]) + conjuncts(t.args[1])
    return [t]


def extend_context(ctx: tuple, governor: Term) -> tuple:
    out = list(ctx)
    for c in conjuncts(governor):
        if c not in out:
            out.append(c)
    return tuple(out)


def step_governor(t: App, i: int) -> Term | None:
    """The governor contributed when descending into argument ``i`` of ``t``."""
    if t.fn == IF and len(t.args) == 3:
        if i == 1:
            return normalize_governor(t.args[0])
        if i == 2:
            return negate(t.args[0])
    elif t.fn == IMPLIES and len(t.args) == 2 and i == 1:
        return normalize_governor(t.args[0])
    return None


def governors(t: Term, path: Path) -> list:
    """If-tests (negated on else-branches) on the way from the root to ``path``."""
    out = []
    for i in path:
        if not isinstance(t, App) or not 0 <= i < len(t.args):
            raise InvalidPosition(f"no subterm at {tuple(path)}")
        g = step_governor(t, i)
        if g is not None:
            out.append(g)
        t = t.args[i]
    return out


def context_at(base: tuple, t: Term, path: Path) -> tuple:
    ctx = base
    for g in governors(t, path):
        ctx = extend_context(ctx, g)
    return ctx


def make_and(terms) -> Term:
    terms = list(terms)
    if not terms:
        return TRUE
    out = terms[-1]
    for t in reversed(terms[:-1]):
        out = App(IF, (t, out, FALSE))
    return out
