"""Site patterns selecting which subterms of a body get simplified.

``_`` matches anything, ``@`` matches anything and marks it as a site, and
``(:@ p)`` marks subterms matching ``p``.  Other symbols in a pattern are
literal: they only match the identical variable.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import count

from .sexpr import QUOTE, SExpr, Sym
from .terms import App, Term, Var, governors
from .translate import TranslateError, expression_vars, translate
from .world import World

WILD, SITE, WRAP = Sym("_"), Sym("@"), Sym(":@")


class PatternError(ValueError):
    pass


@dataclass(frozen=True)
class Wild:
    pass


@dataclass(frozen=True)
class Site:
    pass


@dataclass(frozen=True)
class WrappedSite:
    sub: object


@dataclass(frozen=True)
class Literal:
    term: Term


@dataclass(frozen=True)
class PApp:
    fn: Sym
    args: tuple


@dataclass(frozen=True)
class SiteMatch:
    position: tuple
    governors: tuple


def parse_pattern(form: SExpr, world: World):
    """Parse a ``:simplify-body`` pattern."""
    pat = _parse(form, world, inside_site=False)
    if not _has_site(pat):
        raise PatternError("pattern has no site marker (@ or (:@ ...))")
    return pat


def _parse(form: SExpr, world: World, inside_site: bool):
    holes: dict = {}
    fresh = count(1)

    def prep(x, top):
        # replace markers by placeholder symbols, remembering what they stand for
        if x == WILD or x == SITE:
            if x == SITE and inside_site:
                raise PatternError("site markers cannot be nested")
            name = Sym(f"{x}%{next(fresh)}")
            holes[name] = Wild() if x == WILD else Site()
            return name
        if isinstance(x, tuple) and x:
            if x[0] == WRAP:
                if inside_site:
                    raise PatternError("site markers cannot be nested")
                if len(x) != 2:
                    raise PatternError("(:@ ...) takes exactly one sub-pattern")
                name = Sym(f"@%{next(fresh)}")
                holes[name] = WrappedSite(_parse(x[1], world, inside_site=True))
                return name
            if x[0] == QUOTE:
                return x
            return (x[0],) + tuple(prep(a, False) for a in x[1:])
        return x

    prepped = prep(form, True)
    try:
        term = translate(prepped, world, expression_vars(prepped))
    except TranslateError as e:
        raise PatternError(f"untranslatable pattern: {e}") from None
    return _convert(term, holes)


def _convert(t: Term, holes: dict):
    if isinstance(t, Var) and t.name in holes:
        return holes[t.name]
    if isinstance(t, App):
        args = tuple(_convert(a, holes) for a in t.args)
        if all(isinstance(a, Literal) for a in args):
            return Literal(t)
        return PApp(t.fn, args)
    return Literal(t)


def _has_site(p) -> bool:
    if isinstance(p, (Site, WrappedSite)):
        return True
    if isinstance(p, PApp):
        return any(_has_site(a) for a in p.args)
    return False


def match_here(pat, t: Term):
    """Relative site paths if ``pat`` matches ``t`` at its root, else None."""
    if isinstance(pat, Wild):
        return []
    if isinstance(pat, Site):
        return [()]
    if isinstance(pat, WrappedSite):
        return [()] if match_here(pat.sub, t) is not None else None
    if isinstance(pat, Literal):
        return [] if pat.term == t else None
    if not (isinstance(t, App) and t.fn == pat.fn and len(t.args) == len(pat.args)):
        return None
    out = []
    for i, (p, a) in enumerate(zip(pat.args, t.args)):
        sub = match_here(p, a)
        if sub is None:
            return None
        out.extend((i,) + s for s in sub)
    return out


def match_sites(pat, body: Term) -> list[SiteMatch]:
    """Sites of every outermost match of ``pat`` in ``body``, in position order."""
    found = []
    stack = [((), body)]
    while stack:
        path, t = stack.pop()
        rel = match_here(pat, t)
        if rel is not None:
            found.extend(path + r for r in rel)
            continue
        if isinstance(t, App):
            for i in reversed(range(len(t.args))):
                stack.append((path + (i,), t.args[i]))
    if not found:
        raise PatternError("pattern does not match body")
    return [SiteMatch(p, tuple(governors(body, p))) for p in sorted(found)]
