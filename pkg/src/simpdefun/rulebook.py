"""Rewrite rules, rule books, and active theories."""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from types import MappingProxyType
from typing import Iterable

from .sexpr import SExpr, Sym, parse_sexprs
from .terms import EQUAL, IMPLIES, App, Const, Term, Var, conjuncts, free_vars, make_and
from .translate import TranslateError, expression_vars, translate
from .world import World

DEFTHM, DEFTHMD = Sym("DEFTHM"), Sym("DEFTHMD")
EC_KW = Sym(":EXECUTABLE-COUNTERPART")
DEF_KW = Sym(":DEFINITION")
_EC_ALIASES = (EC_KW, Sym(":E"))


class RuleError(ValueError):
    pass


@dataclass(frozen=True)
class RewriteRule:
    rune: Sym
    hyps: tuple
    lhs: Term
    rhs: Term
    enabled_by_default: bool = True
    order: int = 0
    # variables that must be bound to quoted constants (syntactic side condition)
    constant_vars: frozenset = frozenset()

    @property
    def variable_lhs(self) -> bool:
        return isinstance(self.lhs, Var)

    @property
    def head(self) -> Sym | None:
        return self.lhs.fn if isinstance(self.lhs, App) else None

    def statement(self) -> Term:
        concl = App(EQUAL, (self.lhs, self.rhs))
        if not self.hyps:
            return concl
        return App(IMPLIES, (make_and(self.hyps), concl))


def make_rule(rune: Sym, hyps, lhs: Term, rhs: Term, enabled: bool = True,
              order: int = 0, constant_vars=()) -> RewriteRule:
    """Build a rule, enforcing the well-formedness conditions."""
    hyps = tuple(hyps)
    if isinstance(lhs, Const):
        raise RuleError(f"{rune}: left-hand side is a constant")
    lhs_vars = free_vars(lhs)
    extra = free_vars(rhs) - lhs_vars
    if extra:
        raise RuleError(f"{rune}: right-hand side variables {sorted(extra)} do not occur in the left-hand side")
    if isinstance(lhs, Var):
        if not hyps:
            raise RuleError(f"{rune}: a variable left-hand side needs hypotheses")
        extra = set().union(*(free_vars(h) for h in hyps)) - lhs_vars
        if extra:
            raise RuleError(f"{rune}: variable-lhs rule hypotheses mention {sorted(extra)}")
    return RewriteRule(rune, hyps, lhs, rhs, enabled, order, frozenset(constant_vars))


def rule_from_statement(rune: Sym, stmt: Term, enabled: bool = True, order: int = 0) -> RewriteRule:
    hyps: tuple = ()
    if isinstance(stmt, App) and stmt.fn == IMPLIES:
        hyps = tuple(conjuncts(stmt.args[0]))
        stmt = stmt.args[1]
    if not (isinstance(stmt, App) and stmt.fn == EQUAL):
        raise RuleError(f"{rune}: conclusion is not an equality")
    lhs, rhs = stmt.args
    return make_rule(rune, hyps, lhs, rhs, enabled, order)


@dataclass(frozen=True)
class RuleBook:
    rules: tuple = ()
    # executable counterparts disabled by default (in-theory adjustments)
    ec_disabled: frozenset = frozenset()
    _by_rune: MappingProxyType = field(default=None, compare=False, repr=False)
    _by_head: MappingProxyType = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        by_rune, by_head = {}, {}
        for r in self.rules:
            if r.rune in by_rune:
                raise RuleError(f"duplicate rune {r.rune}")
            by_rune[r.rune] = r
            by_head.setdefault(r.head, []).append(r)
        object.__setattr__(self, "_by_rune", MappingProxyType(by_rune))
        object.__setattr__(self, "_by_head", MappingProxyType(
            {h: tuple(sorted(rs, key=lambda r: -r.order)) for h, rs in by_head.items()}))

    def __contains__(self, rune) -> bool:
        return rune in self._by_rune

    def __getitem__(self, rune) -> RewriteRule:
        return self._by_rune[rune]

    def get(self, rune) -> RewriteRule | None:
        return self._by_rune.get(rune)

    def runes(self) -> list:
        return [r.rune for r in self.rules]

    def candidates(self, head) -> tuple:
        """Rules whose lhs has function ``head`` (None: variable lhs), latest first."""
        return self._by_head.get(head, ())

    def next_order(self) -> int:
        return max((r.order for r in self.rules), default=-1) + 1

    def add(self, rule: RewriteRule) -> "RuleBook":
        if rule.rune in self._by_rune:
            raise RuleError(f"duplicate rune {rule.rune}")
        rule = replace(rule, order=self.next_order())
        return replace(self, rules=self.rules + (rule,), _by_rune=None, _by_head=None)

    def set_defaults(self, enable=(), disable=(), ec_enable=(), ec_disable=()) -> "RuleBook":
        for rune in list(enable) + list(disable):
            if rune not in self._by_rune:
                raise RuleError(f"unknown rune {rune}")
        enable, disable = set(enable), set(disable)
        rules = tuple(replace(r, enabled_by_default=(r.rune in enable) or
                              (r.enabled_by_default and r.rune not in disable))
                      for r in self.rules)
        ec = (self.ec_disabled - set(ec_enable)) | set(ec_disable)
        return RuleBook(rules, frozenset(ec))


def add_rule(book: RuleBook, thm_form: SExpr, world: World, default_enabled: bool | None = None) -> RuleBook:
    """Add a ``(defthm NAME BODY)`` / ``(defthmd NAME BODY)`` form to ``book``."""
    if not (isinstance(thm_form, tuple) and len(thm_form) == 3 and thm_form[0] in (DEFTHM, DEFTHMD)
            and isinstance(thm_form[1], Sym)):
        raise RuleError("malformed theorem form: expected (defthm name body)")
    _, rune, body = thm_form
    if default_enabled is None:
        default_enabled = thm_form[0] == DEFTHM
    if rune in book or world.is_defined(rune):
        raise RuleError(f"name already in use: {rune}")
    try:
        stmt = translate(body, world, expression_vars(body))
    except TranslateError as e:
        raise RuleError(f"{rune}: {e}") from None
    return book.add(rule_from_statement(rune, stmt, default_enabled, book.next_order()))


# --- theories --------------------------------------------------------------

def ec_rune(fn: Sym) -> tuple:
    return (EC_KW, fn)


def definition_rune(fn: Sym) -> tuple:
    return (DEF_KW, fn)


def parse_rune(x: SExpr):
    """Return ``('rule', sym)`` or ``('ec', fn)`` for a rune designator."""
    if isinstance(x, Sym) and not x.is_keyword:
        return "rule", x
    if isinstance(x, tuple) and len(x) == 2 and x[0] in _EC_ALIASES and isinstance(x[1], Sym):
        return "ec", x[1]
    raise RuleError(f"unrecognized rune designator {x!r}")


@dataclass(frozen=True)
class ActiveTheory:
    enabled: frozenset
    ec_disabled: frozenset = frozenset()

    def is_enabled(self, rune) -> bool:
        return rune in self.enabled

    def ec_enabled(self, fn) -> bool:
        return fn not in self.ec_disabled


def theory_from(book: RuleBook, world: World, theory: Iterable | None = None,
                enable: Iterable = (), disable: Iterable = ()) -> ActiveTheory:
    """Start from ``theory`` (or the book's defaults), add ``enable``, remove ``disable``."""
    def split(items):
        rules, ecs = set(), set()
        for x in items:
            kind, name = parse_rune(x)
            if kind == "rule":
                if name not in book:
                    raise RuleError(f"unknown rune {name}")
                rules.add(name)
            else:
                if not world.is_defined(name):
                    raise RuleError(f"unknown function {name}")
                ecs.add(name)
        return rules, ecs

    en_rules, en_ecs = split(enable)
    dis_rules, dis_ecs = split(disable)
    clash = (en_rules & dis_rules) | (en_ecs & dis_ecs)
    if clash:
        raise RuleError(f"runes both enabled and disabled: {sorted(clash)}")
    if theory is not None:
        base_rules, base_ecs = split(theory)
        ec_disabled = set(book.ec_disabled) - base_ecs
    else:
        base_rules = {r.rune for r in book.rules if r.enabled_by_default}
        ec_disabled = set(book.ec_disabled)
    return ActiveTheory(frozenset((base_rules | en_rules) - dis_rules),
                        frozenset((ec_disabled - en_ecs) | dis_ecs))


# --- the built-in book -----------------------------------------------------

_BASE_RULES = """
(defthm car-cons (equal (car (cons x y)) x))
(defthm cdr-cons (equal (cdr (cons x y)) y))
(defthm nth-of-0 (equal (nth 0 x) (car x)))
(defthm fold-consts-in-+ (equal (+ c1 (+ c2 x)) (+ (+ c1 c2) x)))
(defthm if-same (equal (if x y y) y))
(defthm if-t (equal (if t y z) y))
(defthm if-nil (equal (if nil y z) z))
(defthm implies-of-t (equal (implies x t) t))
(defthm true-listp-of-cdr (implies (true-listp x) (equal (true-listp (cdr x)) t)))
(defthm natp-of-decrement (implies (not (zp x)) (equal (natp (+ -1 x)) t)))
"""

_CONSTANT_VARS = {Sym("FOLD-CONSTS-IN-+"): (Sym("C1"), Sym("C2"))}


def base_book() -> RuleBook:
    world = World()
    book = RuleBook()
    for form in parse_sexprs(_BASE_RULES):
        book = add_rule(book, form, world)
    rules = []
    for r in book.rules:
        if r.rune in _CONSTANT_VARS:
            r = replace(r, constant_vars=frozenset(_CONSTANT_VARS[r.rune]))
        rules.append(r)
    x = Var(Sym("X"))
    rules.append(make_rule(Sym("TRUE-LISTP-NOT-CONSP"),
                           (App(Sym("TRUE-LISTP"), (x,)), App(Sym("NOT"), (App(Sym("CONSP"), (x,)),))),
                           x, Const(Sym("NIL")), True, len(rules)))
    return RuleBook(tuple(rules))
