"""Seeded random terms for the property tests."""

import random

from simpdefun.sexpr import Sym
from simpdefun.terms import App, Const, NIL, T, Var, free_vars, from_list, instantiate, size

VARS = tuple(Var(Sym(n)) for n in ("X", "Y", "Z"))

# primitive name -> arity; IF is handled separately
PRIMS = {
    "CONS": 2, "CAR": 1, "CDR": 1, "CONSP": 1, "EQUAL": 2, "NOT": 1,
    "BINARY-+": 2, "BINARY-*": 2, "UNARY--": 1, "<": 2, "ZP": 1, "NATP": 1,
    "ENDP": 1, "TRUE-LISTP": 1, "NTH": 2, "LEN": 1, "APPEND": 2, "IMPLIES": 2,
}


def random_const(rng: random.Random) -> Const:
    r = rng.random()
    if r < 0.5:
        return Const(rng.randint(-5, 5))
    if r < 0.7:
        return Const(rng.choice((T, NIL)))
    if r < 0.85:
        return Const(Sym(rng.choice(("A", "B", "FOO", ":K"))))
    return Const(from_list([rng.randint(0, 3) for _ in range(rng.randint(1, 3))]))


def random_term(rng: random.Random, depth: int = 4, fns=None, vars_=VARS):
    fns = PRIMS if fns is None else fns
    if depth <= 0 or rng.random() < 0.3:
        return rng.choice(vars_) if rng.random() < 0.6 else random_const(rng)
    if rng.random() < 0.15:
        return App(Sym("IF"), tuple(random_term(rng, depth - 1, fns, vars_) for _ in range(3)))
    name = rng.choice(sorted(fns))
    return App(Sym(name), tuple(random_term(rng, depth - 1, fns, vars_) for _ in range(fns[name])))


def small_terms(seed: int, count: int, max_size: int, **kw):
    rng = random.Random(seed)
    out = []
    while len(out) < count:
        t = random_term(rng, **kw)
        if size(t) <= max_size:
            out.append(t)
    return out


def redex_term(rng: random.Random, book, depth: int = 4, vars_=VARS):
    """Like random_term, but often plants an instance of some rule's left-hand side."""
    if depth > 0 and rng.random() < 0.35:
        rule = rng.choice(book.rules)
        subst = {}
        for v in free_vars(rule.lhs):
            if v in rule.constant_vars:
                subst[v] = Const(rng.randint(-5, 5))
            else:
                subst[v] = redex_term(rng, book, depth - 1, vars_)
        return instantiate(rule.lhs, subst)
    if depth <= 0 or rng.random() < 0.25:
        return rng.choice(vars_) if rng.random() < 0.6 else random_const(rng)
    if rng.random() < 0.15:
        return App(Sym("IF"), tuple(redex_term(rng, book, depth - 1, vars_) for _ in range(3)))
    name = rng.choice(sorted(PRIMS))
    return App(Sym(name), tuple(redex_term(rng, book, depth - 1, vars_) for _ in range(PRIMS[name])))
