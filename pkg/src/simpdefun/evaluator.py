"""Fueled interpreter over terms, plus seeded generation of test inputs.

Evaluation uses an explicit stack so recursion depth in the evaluated
program is bounded by fuel, not by the Python stack.
"""

from __future__ import annotations

import random
from typing import Mapping

from .prims import PRIMITIVES
from .sexpr import Sym
from .terms import IF, NIL, Const, Pair, Term, Value, Var, truthy
from .world import World

DEFAULT_FUEL = 100_000


class OutOfFuel(Exception):
    pass


class EvalError(Exception):
    pass


_EVAL, _BRANCH, _APPLY = 0, 1, 2


def eval_term(world: World, term: Term, env: Mapping, fuel: int = DEFAULT_FUEL) -> Value:
    """Evaluate ``term`` under ``env``; each user-function call costs one fuel.

    Raises :class:`OutOfFuel` when fuel is exhausted and :class:`EvalError`
    on arity violations or unknown functions.
    """
    defs = world
    todo = [(_EVAL, term, env)]
    vals: list = []
    push, pop = todo.append, todo.pop
    while todo:
        op, a, b = pop()
        if op == _EVAL:
            cls = type(a)
            if cls is Const:
                vals.append(a.value)
            elif cls is Var:
                try:
                    vals.append(b[a.name])
                except KeyError:
                    raise EvalError(f"unbound variable {a.name}") from None
            else:
                args = a.args
                if a.fn == IF:
                    if len(args) != 3:
                        raise EvalError("IF expects 3 arguments")
                    push((_BRANCH, a, b))
                    push((_EVAL, args[0], b))
                else:
                    push((_APPLY, a, None))
                    for arg in reversed(args):
                        push((_EVAL, arg, b))
        elif op == _BRANCH:
            test = vals.pop()
            push((_EVAL, a.args[1] if truthy(test) else a.args[2], b))
        else:
            fn, n = a.fn, len(a.args)
            if n:
                args = vals[-n:]
                del vals[-n:]
            else:
                args = []
            prim = PRIMITIVES.get(fn)
            if prim is not None:
                if prim[0] != n:
                    raise EvalError(f"{fn} expects {prim[0]} arguments")
                vals.append(prim[1](*args))
                continue
            d = defs.get(fn)
            if d is None:
                raise EvalError(f"unknown function {fn}")
            if len(d.formals) != n:
                raise EvalError(f"{fn} expects {len(d.formals)} arguments")
            if fuel <= 0:
                raise OutOfFuel(fn)
            fuel -= 1
            push((_EVAL, d.body, dict(zip(d.formals, args))))
    return vals[-1]


# --- input generation --------------------------------------------------------

_SYMBOLS = tuple(Sym(s) for s in ("NIL", "T", "A", "B", "FOO", "X", ":KEY", "INT32"))
_EDGES = (2**31 - 1, 2**31, -2**31, -2**31 - 1, 2**34, -2**34, 2**15, -2**15)
INT_LIMIT = 2**34


def random_value(rng: random.Random, depth: int = 4) -> Value:
    """Integers in [-2^34, 2^34] (mostly small), symbols, and nested lists."""
    r = rng.random()
    if depth <= 0 or r < 0.55:
        return _random_int(rng)
    if r < 0.72:
        return rng.choice(_SYMBOLS)
    n = rng.randint(0, 4)
    tail = NIL
    if rng.random() < 0.1:
        tail = _random_int(rng) if rng.random() < 0.5 else rng.choice(_SYMBOLS[1:])
    out = tail
    for _ in range(n):
        out = Pair(random_value(rng, depth - 1), out)
    if n == 0 and tail != NIL:
        out = Pair(random_value(rng, depth - 1), tail)
    return out


def _random_int(rng: random.Random) -> int:
    r = rng.random()
    if r < 0.8:
        return rng.randint(-10, 10)
    if r < 0.97:
        return rng.randint(-500, 500)
    if r < 0.99:
        return rng.choice(_EDGES)
    return rng.randint(-INT_LIMIT, INT_LIMIT)


def gen_bindings(formals, constraint: Term | None, world: World, seed: int,
                 count: int, fuel: int = DEFAULT_FUEL) -> list[dict]:
    """Up to ``count`` seeded bindings of ``formals`` satisfying ``constraint``.

    Rejection sampling gives up after ``1000 * count`` attempts.
    """
    rng = random.Random(seed)
    if isinstance(constraint, Const):
        if not truthy(constraint.value):
            return []
        constraint = None
    out: list[dict] = []
    attempts = 0
    while len(out) < count and attempts < 1000 * count:
        attempts += 1
        env = {f: random_value(rng) for f in formals}
        if constraint is not None:
            try:
                if not truthy(eval_term(world, constraint, env, fuel)):
                    continue
            except OutOfFuel:
                continue
        out.append(env)
    return out
