"""Translation between user-level s-expressions and internal terms.

``translate`` removes the fixed sugar set (n-ary ``+``/``*``, ``-``,
``and``/``or``, ``list``, comparisons) and quotes constants.
``untranslate_plain`` re-sugars; ``directed_untranslate`` reuses the text of
an old source form wherever the new term still agrees with it.
"""

from __future__ import annotations

from dataclasses import dataclass

from .prims import BOOLEAN_PRIMITIVES
from .sexpr import QUOTE, SExpr, Sym
from .terms import (FALSE, IF, NIL, NOT, TRUE, App, Const, T, Term, Var,
                    sexpr_to_value, value_to_sexpr)
from .world import Definition, DefinitionError, World

PLUS, TIMES, MINUS = Sym("+"), Sym("*"), Sym("-")
AND, OR, LIST = Sym("AND"), Sym("OR"), Sym("LIST")
BINARY_PLUS, BINARY_TIMES, UNARY_MINUS = Sym("BINARY-+"), Sym("BINARY-*"), Sym("UNARY--")
CONS, LESS = Sym("CONS"), Sym("<")
LE, GE, GT = Sym("<="), Sym(">="), Sym(">")


class TranslateError(ValueError):
    pass


@dataclass(frozen=True)
class Src:
    """Source text of a translated node, aligned with its arguments.

    ``kids[i]`` annotates argument ``i``; ``None`` marks an argument that was
    introduced by sugar expansion and has no text of its own.
    """

    sexpr: SExpr
    kids: tuple = ()


class _Translator:
    def __init__(self, world: World, bound, pending=None):
        self.world = world
        self.bound = frozenset(bound)
        self.pending = dict(pending or {})

    def arity(self, fn):
        if fn in self.pending:
            return self.pending[fn]
        return self.world.arity(fn)

    def tr(self, x: SExpr) -> tuple[Term, Src]:
        if isinstance(x, bool):
            raise TranslateError("booleans are not expressions")
        if isinstance(x, int):
            return Const(x), Src(x)
        if isinstance(x, Sym):
            if x in (T, NIL) or x.is_keyword:
                return Const(x), Src(x)
            if x not in self.bound:
                raise TranslateError(f"unbound variable {x}")
            return Var(x), Src(x)
        if not x:
            return FALSE, Src(x)
        head, args = x[0], x[1:]
        if not isinstance(head, Sym):
            raise TranslateError(f"illegal function position: {head!r}")
        if head == QUOTE:
            if len(args) != 1:
                raise TranslateError("QUOTE takes exactly one argument")
            return Const(sexpr_to_value(args[0])), Src(x)
        sugar = _SUGAR.get(head)
        if sugar is not None:
            return sugar(self, x, args)
        if head == Sym("LET") or head == Sym("LET*"):
            raise TranslateError("let expressions are not supported")
        arity = self.arity(head)
        if arity is None:
            raise TranslateError(f"unknown function {head}")
        if arity != len(args):
            raise TranslateError(f"{head} expects {arity} argument(s), got {len(args)}")
        pairs = [self.tr(a) for a in args]
        return App(head, tuple(t for t, _ in pairs)), Src(x, tuple(s for _, s in pairs))

    def nary(self, x, args, binary, unit):
        if not args:
            return Const(unit), Src(x)
        if len(args) == 1:
            t, s = self.tr(args[0])
            return App(binary, (Const(unit), t)), Src(x, (None, s))
        first, fs = self.tr(args[0])
        if len(args) == 2:
            rest, rs = self.tr(args[1])
        else:
            rest, rs = self.tr((x[0],) + tuple(args[1:]))
        return App(binary, (first, rest)), Src(x, (fs, rs))

    def minus(self, x, args):
        if len(args) == 1:
            t, s = self.tr(args[0])
            return App(UNARY_MINUS, (t,)), Src(x, (s,))
        if len(args) == 2:
            a, sa = self.tr(args[0])
            b, sb = self.tr((MINUS, args[1]))
            return App(BINARY_PLUS, (a, b)), Src(x, (sa, sb))
        raise TranslateError("- takes one or two arguments")

    def and_(self, x, args):
        if not args:
            return TRUE, Src(x)
        if len(args) == 1:
            return self.tr(args[0])
        a, sa = self.tr(args[0])
        rest = args[1] if len(args) == 2 else (AND,) + tuple(args[1:])
        b, sb = self.tr(rest)
        return App(IF, (a, b, FALSE)), Src(x, (sa, sb, None))

    def or_(self, x, args):
        if not args:
            return FALSE, Src(x)
        if len(args) == 1:
            return self.tr(args[0])
        rest = args[1] if len(args) == 2 else (OR,) + tuple(args[1:])
        b, sb = self.tr(rest)
        first = args[0]
        if isinstance(first, tuple) and len(first) == 2 and first[0] == NOT:
            # (or (not p) b) == (if p b 't)
            p, sp = self.tr(first[1])
            return App(IF, (p, b, TRUE)), Src(x, (sp, sb, None))
        a, sa = self.tr(first)
        if isinstance(a, App) and a.fn in BOOLEAN_PRIMITIVES:
            return App(IF, (a, TRUE, b)), Src(x, (sa, None, sb))
        return App(IF, (a, a, b)), Src(x, (sa, sa, sb))

    def list_(self, x, args):
        if not args:
            return FALSE, Src(x)
        a, sa = self.tr(args[0])
        if len(args) == 1:
            return App(CONS, (a, FALSE)), Src(x, (sa, None))
        b, sb = self.tr((LIST,) + tuple(args[1:]))
        return App(CONS, (a, b)), Src(x, (sa, sb))

    def compare(self, x, args):
        if len(args) != 2:
            raise TranslateError(f"{x[0]} takes two arguments")
        a, b = args
        if x[0] == GT:
            t, s = self.tr((LESS, b, a))
            return t, Src(x, s.kids)
        inner = (LESS, b, a) if x[0] == LE else (LESS, a, b)
        t, s = self.tr(inner)
        return App(NOT, (t,)), Src(x, (s,))


_SUGAR = {
    PLUS: lambda tr, x, a: tr.nary(x, a, BINARY_PLUS, 0),
    TIMES: lambda tr, x, a: tr.nary(x, a, BINARY_TIMES, 1),
    MINUS: lambda tr, x, a: tr.minus(x, a),
    AND: lambda tr, x, a: tr.and_(x, a),
    OR: lambda tr, x, a: tr.or_(x, a),
    LIST: lambda tr, x, a: tr.list_(x, a),
    LE: lambda tr, x, a: tr.compare(x, a),
    GE: lambda tr, x, a: tr.compare(x, a),
    GT: lambda tr, x, a: tr.compare(x, a),
}


def translate(form: SExpr, world: World, bound=(), pending=None) -> Term:
    """Translate a user-level expression.

    ``bound`` lists the symbols usable as variables; ``pending`` maps names
    being defined (not yet in ``world``) to their arities.
    """
    return _Translator(world, bound, pending).tr(form)[0]


def translate_annotated(form: SExpr, world: World, bound=(), pending=None) -> tuple[Term, Src]:
    return _Translator(world, bound, pending).tr(form)


def expression_vars(x: SExpr) -> set:
    """Symbols in argument positions of ``x`` that would translate as variables."""
    out = set()
    stack = [x]
    while stack:
        u = stack.pop()
        if isinstance(u, Sym):
            if u not in (T, NIL) and not u.is_keyword:
                out.add(u)
        elif isinstance(u, tuple) and u and u[0] != QUOTE:
            stack.extend(u[1:])
    return out


# --- untranslation -----------------------------------------------------------

def _const_sexpr(v) -> SExpr:
    if isinstance(v, int) or (isinstance(v, Sym) and (v in (T, NIL) or v.is_keyword)):
        return v
    return (QUOTE, value_to_sexpr(v))


def _is_form(x, head, min_args=2) -> bool:
    return isinstance(x, tuple) and len(x) > min_args and x[0] == head


def _splice(head, first, rest) -> SExpr:
    if _is_form(rest, head):
        return (head, first) + tuple(rest[1:])
    return (head, first, rest)


def _user_head(fn):
    return {BINARY_PLUS: PLUS, BINARY_TIMES: TIMES, UNARY_MINUS: MINUS}.get(fn, fn)


def untranslate_plain(t: Term) -> SExpr:
    if isinstance(t, Var):
        return t.name
    if isinstance(t, Const):
        return _const_sexpr(t.value)
    fn, args = t.fn, t.args
    if fn == IF:
        a, b, c = args
        if c == FALSE:
            return _splice(AND, untranslate_plain(a), untranslate_plain(b))
        if c == TRUE:
            return _splice(OR, (NOT, untranslate_plain(a)), untranslate_plain(b))
        if b == TRUE and isinstance(a, App) and a.fn in BOOLEAN_PRIMITIVES and a.fn != NOT:
            return _splice(OR, untranslate_plain(a), untranslate_plain(c))
        if a == b and not (isinstance(a, App) and a.fn in BOOLEAN_PRIMITIVES):
            return _splice(OR, untranslate_plain(a), untranslate_plain(c))
        return (IF, untranslate_plain(a), untranslate_plain(b), untranslate_plain(c))
    if fn in (BINARY_PLUS, BINARY_TIMES):
        return _splice(_user_head(fn), untranslate_plain(args[0]), untranslate_plain(args[1]))
    if fn == UNARY_MINUS:
        return (MINUS, untranslate_plain(args[0]))
    if fn == CONS:
        return _cons_form(untranslate_plain(args[0]), args[1], untranslate_plain(args[1]))
    return (fn,) + tuple(untranslate_plain(a) for a in args)


def _cons_form(first, tail: Term, tail_sexpr) -> SExpr:
    if tail == FALSE:
        return (LIST, first)
    if isinstance(tail_sexpr, tuple) and len(tail_sexpr) > 1 and tail_sexpr[0] == LIST:
        return (LIST, first) + tuple(tail_sexpr[1:])
    return (CONS, first, tail_sexpr)


def _reassemble(src_head, new: App, kids: list) -> SExpr:
    """Spell ``new`` using the surface form the old source used at this node."""
    fn = new.fn
    if fn == IF and src_head == AND and new.args[2] == FALSE:
        return _splice(AND, kids[0], kids[1])
    if fn == BINARY_PLUS and src_head == PLUS or fn == BINARY_TIMES and src_head == TIMES:
        return _splice(src_head, kids[0], kids[1])
    if fn == CONS and src_head == LIST:
        return _cons_form(kids[0], new.args[1], kids[1])
    return (_user_head(fn),) + tuple(kids)


def _directed(new: Term, old: Term, src: Src | None) -> SExpr:
    if src is None:
        return untranslate_plain(new)
    if new == old:
        return src.sexpr
    if (isinstance(new, App) and isinstance(old, App) and new.fn == old.fn
            and len(new.args) == len(old.args) and len(src.kids) == len(old.args)):
        kids = [_directed(n, o, s) for n, o, s in zip(new.args, old.args, src.kids)]
        head = src.sexpr[0] if isinstance(src.sexpr, tuple) and src.sexpr else None
        return _reassemble(head, new, kids)
    return untranslate_plain(new)


def directed_untranslate(new: Term, old: Term, old_source: SExpr, world: World,
                         bound=(), pending=None) -> SExpr:
    """Untranslate ``new`` reusing ``old_source`` text where ``new`` agrees with ``old``.

    The result always translates back to ``new``; if the guided spelling would
    not, the plain untranslation is returned instead.
    """
    try:
        old_t, src = translate_annotated(old_source, world, bound, pending)
    except TranslateError:
        return untranslate_plain(new)
    if old_t != old:
        src = None
    out = _directed(new, old, src)
    try:
        if translate(out, world, bound, pending) == new:
            return out
    except TranslateError:
        pass
    return untranslate_plain(new)


# --- definitions -------------------------------------------------------------

DEFUN = Sym("DEFUN")
MUTUAL_RECURSION = Sym("MUTUAL-RECURSION")
DECLARE, XARGS = Sym("DECLARE"), Sym("XARGS")
GUARD_KW, MEASURE_KW = Sym(":GUARD"), Sym(":MEASURE")


def _parse_defun(form):
    if not (isinstance(form, tuple) and len(form) >= 4 and form[0] == DEFUN):
        raise DefinitionError("malformed defun: expected (defun name formals ... body)")
    name, formals = form[1], form[2]
    if not isinstance(name, Sym) or name.is_keyword or name in (T, NIL):
        raise DefinitionError(f"illegal function name {name!r}")
    if not isinstance(formals, tuple) or not all(isinstance(f, Sym) for f in formals):
        raise DefinitionError(f"{name}: formals must be a list of symbols")
    for f in formals:
        if f in (T, NIL) or f.is_keyword:
            raise DefinitionError(f"{name}: illegal formal {f}")
    if len(set(formals)) != len(formals):
        raise DefinitionError(f"{name}: duplicate formals")
    xargs = {}
    for decl in form[3:-1]:
        if not (isinstance(decl, tuple) and decl and decl[0] == DECLARE):
            raise DefinitionError(f"{name}: malformed declare {decl!r}")
        for spec in decl[1:]:
            if not (isinstance(spec, tuple) and spec and spec[0] == XARGS) or len(spec) % 2 != 1:
                raise DefinitionError(f"{name}: only (xargs :guard ... :measure ...) declarations are supported")
            for key, val in zip(spec[1::2], spec[2::2]):
                if key not in (GUARD_KW, MEASURE_KW):
                    raise DefinitionError(f"{name}: unsupported declare field {key}")
                if key in xargs:
                    raise DefinitionError(f"{name}: duplicate declare field {key}")
                xargs[key] = val
    return name, formals, xargs, form[-1]


def define(world: World, form: SExpr) -> World:
    """Admit a ``defun`` or ``mutual-recursion`` form."""
    if isinstance(form, tuple) and form and form[0] == MUTUAL_RECURSION:
        parts = [_parse_defun(f) for f in form[1:]]
        if not parts:
            raise DefinitionError("empty mutual-recursion")
    else:
        parts = [_parse_defun(form)]
    names = tuple(p[0] for p in parts)
    if len(set(names)) != len(names):
        raise DefinitionError("duplicate names in mutual-recursion")
    for n in names:
        if world.is_defined(n):
            raise DefinitionError(f"name already defined: {n}")
    pending = {p[0]: len(p[1]) for p in parts}
    defs = []
    for name, formals, xargs, body_src in parts:
        try:
            body = translate(body_src, world, formals, pending)
            guard_src = xargs.get(GUARD_KW)
            measure_src = xargs.get(MEASURE_KW)
            guard = translate(guard_src, world, formals) if guard_src is not None else None
            measure = translate(measure_src, world, formals) if measure_src is not None else None
        except TranslateError as e:
            raise DefinitionError(f"{name}: {e}") from None
        defs.append(Definition(name, formals, body, body_src, guard, measure,
                               guard_src, measure_src, names))
    return world.extend(defs)


def definition_form(d: Definition, body: SExpr, guard: SExpr | None = None,
                    measure: SExpr | None = None) -> SExpr:
    xargs = ()
    if guard is not None:
        xargs += (GUARD_KW, guard)
    if measure is not None:
        xargs += (MEASURE_KW, measure)
    decl = ((DECLARE, (XARGS,) + xargs),) if xargs else ()
    return (DEFUN, d.name, d.formals) + decl + (body,)
