"""Contextual conditional rewriting with replayable traces.

Rewriting is innermost-first: the arguments of a node are rewritten before
the node itself, and each node is retried until no rule applies.  The
then-branch of an ``if`` is rewritten assuming the (already rewritten) test,
the else-branch assuming its negation.
"""

from __future__ import annotations

from dataclasses import dataclass

from .evaluator import EvalError, OutOfFuel, eval_term
from .prims import PRIMITIVES
from .rulebook import ActiveTheory, RewriteRule, RuleBook, ec_rune
from .terms import (IF, NIL, App, Const, Pair, Term, extend_context,
                    free_vars, instantiate, match, replace_at, step_governor,
                    subterm, truthy)
from .world import World

EC_FUEL = 10_000


class RewriteError(ValueError):
    pass


@dataclass(frozen=True)
class ContextHit:
    """A hypothesis justified by literal membership in the context."""
    term: Term


@dataclass(frozen=True)
class Trace:
    initial: Term
    steps: tuple
    final: Term
    limit_hit: bool = False


@dataclass(frozen=True)
class TraceStep:
    position: tuple
    rune: object  # rule symbol, or (:EXECUTABLE-COUNTERPART fn)
    substitution: tuple  # sorted (var, term) pairs
    hyps: tuple  # one Trace or ContextHit per hypothesis
    before: Term
    after: Term


@dataclass(frozen=True)
class Limits:
    max_steps: int = 10_000
    max_backchain_depth: int = 20

    def __post_init__(self):
        if self.max_steps <= 0 or self.max_backchain_depth <= 0:
            raise ValueError("limits must be positive")


def make_context(terms) -> tuple:
    ctx: tuple = ()
    for t in terms:
        ctx = extend_context(ctx, t)
    return ctx


def apply_rule_at(term: Term, rule: RewriteRule, pos, subst) -> Term:
    """Replace the instance of ``rule.lhs`` at ``pos`` by the rhs instance.

    Purely syntactic: hypotheses are not checked here.
    """
    subst = dict(subst)
    target = subterm(term, tuple(pos))
    if instantiate(rule.lhs, subst) != target:
        raise RewriteError(f"{rule.rune}: left-hand side does not match at {tuple(pos)}")
    return replace_at(term, tuple(pos), instantiate(rule.rhs, subst))


def evaluate_ground(world: World, t: App, fuel: int = EC_FUEL):
    """Value of a ground call, or None when it cannot be folded to a constant."""
    if t.fn == IF or not all(isinstance(a, Const) for a in t.args):
        return None
    if t.fn not in PRIMITIVES and t.fn not in world:
        return None
    try:
        v = eval_term(world, t, {}, fuel)
    except (OutOfFuel, EvalError):
        return None
    return v if proper_value(v) else None


def proper_value(v) -> bool:
    # improper lists have no printed form, so they are never folded
    stack = [v]
    while stack:
        u = stack.pop()
        if not isinstance(u, Pair):
            continue
        while isinstance(u, Pair):
            stack.append(u.car)
            u = u.cdr
        if isinstance(u, int) or u != NIL:
            return False
    return True


class _Rewriter:
    def __init__(self, theory: ActiveTheory, book: RuleBook, world: World, limits: Limits):
        self.theory = theory
        self.book = book
        self.world = world
        self.limits = limits
        self.steps_taken = 0
        self.exhausted = False
        self._cands: dict = {}

    def candidates(self, head) -> list:
        if head not in self._cands:
            rules = [r for r in self.book.candidates(head) + self.book.candidates(None)
                     if self.theory.is_enabled(r.rune)]
            rules.sort(key=lambda r: -r.order)
            self._cands[head] = rules
        return self._cands[head]

    def run(self, term: Term, ctx: tuple, depth: int) -> Trace:
        steps: list = []
        cur = term
        while True:
            n = len(steps)
            cur = self.rw(cur, ctx, (), steps, depth, set())
            if len(steps) == n or self.exhausted:
                break
        return Trace(term, tuple(steps), cur, self.exhausted)

    def rw(self, t: Term, ctx: tuple, path: tuple, steps: list, depth: int, fired_var: set) -> Term:
        while True:
            if isinstance(t, App):
                args = list(t.args)
                for i in range(len(args)):
                    node = App(t.fn, tuple(args))
                    g = step_governor(node, i)
                    sub_ctx = extend_context(ctx, g) if g is not None else ctx
                    args[i] = self.rw(args[i], sub_ctx, path + (i,), steps, depth, fired_var)
                t = App(t.fn, tuple(args))
            if self.exhausted:
                return t
            step = self.fire(t, ctx, path, depth, fired_var)
            if step is None:
                return t
            steps.append(step)
            self.steps_taken += 1
            if self.steps_taken >= self.limits.max_steps:
                self.exhausted = True
            t = step.after

    def fire(self, t: Term, ctx: tuple, path: tuple, depth: int, fired_var: set):
        if isinstance(t, App) and self.theory.ec_enabled(t.fn):
            v = evaluate_ground(self.world, t)
            if v is not None:
                return TraceStep(path, ec_rune(t.fn), (), (), t, Const(v))
        if isinstance(t, Const):
            return None
        head = t.fn if isinstance(t, App) else None
        for rule in self.candidates(head):
            if rule.variable_lhs and path in fired_var:
                continue
            subst = match(rule.lhs, t)
            if subst is None:
                continue
            if any(not isinstance(subst.get(v), Const) for v in rule.constant_vars):
                continue
            relieved = self.relieve(rule, list(rule.hyps), subst, [], ctx, depth)
            if relieved is None:
                continue
            full, justs = relieved
            after = instantiate(rule.rhs, full)
            if after == t:
                continue
            if rule.variable_lhs:
                fired_var.add(path)
            return TraceStep(path, rule.rune, tuple(sorted(full.items())), tuple(justs), t, after)
        return None

    def relieve(self, rule, hyps: list, subst: dict, justs: list, ctx: tuple, depth: int):
        if not hyps:
            return subst, justs
        hyp, rest = hyps[0], hyps[1:]
        if free_vars(hyp) - subst.keys():
            # bind the free variables from the context, backtracking on failure
            for c in ctx:
                s2 = match(hyp, c, subst)
                if s2 is not None:
                    out = self.relieve(rule, rest, s2, justs + [ContextHit(c)], ctx, depth)
                    if out is not None:
                        return out
            return None
        inst = instantiate(hyp, subst)
        just = self.relieve_one(inst, ctx, depth, allow_backchain=not rule.variable_lhs)
        if just is None:
            return None
        return self.relieve(rule, rest, subst, justs + [just], ctx, depth)

    def relieve_one(self, inst: Term, ctx: tuple, depth: int, allow_backchain: bool):
        if isinstance(inst, Const):
            return Trace(inst, (), inst) if truthy(inst.value) else None
        if inst in ctx:
            return ContextHit(inst)
        if not allow_backchain or depth >= self.limits.max_backchain_depth or self.exhausted:
            return None
        tr = self.run(inst, ctx, depth + 1)
        if isinstance(tr.final, Const) and truthy(tr.final.value) and not tr.limit_hit:
            return tr
        return None


def used_runes(trace: Trace) -> list:
    """Distinct runes fired in ``trace``, including hypothesis traces, sorted."""
    seen = set()
    stack = [trace]
    while stack:
        tr = stack.pop()
        for st in tr.steps:
            seen.add(st.rune)
            stack.extend(h for h in st.hyps if isinstance(h, Trace))
    return sorted(seen, key=rune_key)


def rune_key(rune) -> str:
    return " ".join(rune) if isinstance(rune, tuple) else str(rune)


def rewrite(term: Term, ctx, theory: ActiveTheory, book: RuleBook, world: World,
            limits: Limits | None = None) -> tuple[Term, Trace, list]:
    """Rewrite ``term`` to a fixpoint; returns ``(final, trace, used_runes)``."""
    rw = _Rewriter(theory, book, world, limits or Limits())
    trace = rw.run(term, make_context(ctx), 0)
    return trace.final, trace, used_runes(trace)
