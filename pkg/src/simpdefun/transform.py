"""The simplify-defun transformation."""

from __future__ import annotations

import re
from dataclasses import dataclass, field, replace

from .patterns import PatternError, match_sites, parse_pattern
from .rewriter import Limits, Trace, make_context, rewrite, rune_key, used_runes
from .rulebook import (ActiveTheory, RuleBook, RuleError, definition_rune, make_rule,
                       rule_from_statement, theory_from)
from .sexpr import QUOTE, SExpr, Sym
from .terms import (EQUAL, IMPLIES, App, Const, Term, Var, context_at, conjuncts,
                    governors, instantiate, make_and, positions, rename_fns,
                    replace_at, term_to_sexpr, truthy)
from .translate import (MUTUAL_RECURSION, TranslateError, definition_form,
                        directed_untranslate, translate, untranslate_plain)
from .world import Definition, World

GUARD_TOKEN = Sym(":GUARD")
UNTRANSLATE_MODES = ("directed", "plain", "raw")
_NUMBERED = re.compile(r"^(.*)\{(\d+)\}$")


class TransformError(ValueError):
    pass


@dataclass(frozen=True)
class Options:
    assumptions: object = None  # None, GUARD_TOKEN, or a tuple of expressions
    simplify_body: SExpr | None = None  # site pattern form
    simplify_guard: bool = False
    simplify_measure: bool = False
    new_name: Sym | None = None
    theorem_name: Sym | None = None
    must_simplify: bool = True
    theory: tuple | None = None
    enable: tuple = ()
    disable: tuple = ()
    untranslate: str = "directed"
    show_only: bool = False
    print_def: bool = True
    assume_obligations: bool = False
    limits: Limits = field(default_factory=Limits)


@dataclass(frozen=True)
class SiteRecord:
    fn: Sym
    position: tuple
    trace: Trace


@dataclass(frozen=True)
class Obligation:
    fn: Sym
    position: tuple  # of the call in the old body
    governors: tuple
    call: Term
    statement: Term
    discharge: Trace | None  # None: unproved


@dataclass(frozen=True)
class Becomes:
    name: Sym
    statement: Term


@dataclass
class TransformRecord:
    target: Sym
    old_names: tuple
    new_names: tuple
    rename_map: dict
    assumptions: tuple
    hyps: Term | None
    hyps_fn: Definition | None
    sites: tuple
    simplified_bodies: dict
    new_defs: tuple
    new_form: SExpr
    guard_traces: dict
    measure_traces: dict
    obligations: tuple
    becomes: tuple
    used_runes: list
    must_simplify: bool
    warnings: list = field(default_factory=list)


# --- small operations --------------------------------------------------------

def next_numbered_name(world: World, base: Sym, taken=()) -> Sym:
    """``base{k}`` for the least unused k >= 1, or k > n when base is ``root{n}``."""
    m = _NUMBERED.match(base)
    root, k = (m.group(1), int(m.group(2)) + 1) if m else (str(base), 1)
    while True:
        name = Sym(f"{root}{{{k}}}")
        if not world.is_defined(name) and name not in taken:
            return name
        k += 1


def collect_governors(body: Term, pos) -> tuple:
    return tuple(governors(body, tuple(pos)))


def rename_calls(term: Term, rename_map) -> Term:
    return rename_fns(term, rename_map)


def clique_calls(body: Term, clique) -> list:
    """``(path, call)`` for every call to a clique member, in pre-order."""
    return [(p, t) for p, t in positions(body) if isinstance(t, App) and t.fn in clique]


def obligation_statement(d: Definition, hyps: Term, body: Term, path) -> Term:
    call = _subterm(body, path)
    govs = collect_governors(body, path)
    at_call = instantiate(hyps, dict(zip(d.formals, call.args)))
    return App(IMPLIES, (make_and((hyps,) + govs), at_call))


def _subterm(t, path):
    for i in path:
        t = t.args[i]
    return t


def hyps_preserved_obligations(defn: Definition, hyps: Term, theory: ActiveTheory,
                               book: RuleBook, world: World, limits: Limits | None = None) -> tuple:
    """One obligation per clique call in ``defn``'s body, each discharged by rewriting."""
    out = []
    for path, call in clique_calls(defn.body, defn.clique):
        stmt = obligation_statement(defn, hyps, defn.body, path)
        _, trace, _ = rewrite(stmt, (), theory, book, world, limits)
        proved = isinstance(trace.final, Const) and truthy(trace.final.value) and not trace.limit_hit
        out.append(Obligation(defn.name, path, collect_governors(defn.body, path), call, stmt,
                              trace if proved else None))
    return tuple(out)


def becomes_statement(old: Definition, new_name: Sym, hyps: Term | None) -> Term:
    args = tuple(Var(f) for f in old.formals)
    eq = App(EQUAL, (App(old.name, args), App(new_name, args)))
    return App(IMPLIES, (hyps, eq)) if hyps is not None else eq


def default_theorem_name(old: Sym, new: Sym) -> Sym:
    return Sym(f"{old}-BECOMES-{new}")


def hyps_definition(name: Sym, d: Definition, hyps: Term) -> Definition:
    return Definition(name, d.formals, hyps, untranslate_plain(hyps))


def hyps_rule(hd: Definition):
    lhs = App(hd.name, tuple(Var(f) for f in hd.formals))
    return make_rule(definition_rune(hd.name), (), lhs, hd.body)


def _rename_heads(x: SExpr, mapping) -> SExpr:
    if isinstance(x, tuple) and x:
        if x[0] == QUOTE:
            return x
        head = mapping.get(x[0], x[0]) if isinstance(x[0], Sym) else x[0]
        return (head,) + tuple(_rename_heads(a, mapping) for a in x[1:])
    return x


def render_body(mode: str, new: Term, simplified: Term, old: Definition, rename_map,
                world: World, pending) -> SExpr:
    if mode == "raw":
        return term_to_sexpr(new)
    if mode == "directed":
        guided = directed_untranslate(simplified, old.body, old.source_body, world, old.formals)
        out = _rename_heads(guided, rename_map)
        try:
            if translate(out, world, old.formals, pending) == new:
                return out
        except TranslateError:
            pass
    return untranslate_plain(new)


def _render_side(mode: str, new: Term, old: Term, old_src, world: World, formals) -> SExpr:
    if new == old and old_src is not None:
        return old_src
    if mode == "raw":
        return term_to_sexpr(new)
    if mode == "directed" and old_src is not None:
        return directed_untranslate(new, old, old_src, world, formals)
    return untranslate_plain(new)


# --- the transformation ------------------------------------------------------

def _resolve_assumptions(d: Definition, opts: Options, world: World) -> tuple:
    a = opts.assumptions
    if a is None:
        return ()
    if a == GUARD_TOKEN:
        if d.guard is None:
            raise TransformError(f"{d.name} has no guard to assume")
        return tuple(conjuncts(d.guard))
    out = []
    for form in a:
        try:
            out.extend(conjuncts(translate(form, world, d.formals)))
        except TranslateError as e:
            raise TransformError(f"bad assumption: {e}") from None
    return tuple(out)


def simplify_defun(world: World, book: RuleBook, fn: Sym, opts: Options) -> tuple[World, TransformRecord]:
    if fn not in world:
        raise TransformError(f"{fn} is not a defined function")
    if opts.untranslate not in UNTRANSLATE_MODES:
        raise TransformError(f"unknown untranslate mode {opts.untranslate}")
    d0 = world[fn]
    clique = d0.clique
    members = [world[n] for n in clique]
    try:
        theory = theory_from(book, world, opts.theory, opts.enable, opts.disable)
    except RuleError as e:
        raise TransformError(str(e)) from None
    assumptions = _resolve_assumptions(d0, opts, world)
    if assumptions and len(clique) > 1:
        raise TransformError("assumptions are not supported for mutually recursive functions")
    if opts.simplify_body is not None and len(clique) > 1:
        raise TransformError(":simplify-body patterns are not supported for mutually recursive functions")
    base_ctx = make_context(assumptions)

    # sites and their traces
    sites, simplified = [], {}
    for d in members:
        if d.name == fn and opts.simplify_body is not None:
            try:
                pat = parse_pattern(opts.simplify_body, world)
                positions_ = [m.position for m in match_sites(pat, d.body)]
            except PatternError as e:
                raise TransformError(str(e)) from None
        else:
            positions_ = [()]
        body = d.body
        for pos in positions_:
            ctx = context_at(base_ctx if d.name == fn else (), d.body, pos)
            _, trace, _ = rewrite(_subterm(d.body, pos), ctx, theory, book, world, opts.limits)
            if trace.limit_hit:
                raise TransformError(f"{d.name}: rewrite step limit reached")
            sites.append(SiteRecord(d.name, pos, trace))
            body = replace_at(body, pos, trace.final)
        simplified[d.name] = body
    if opts.must_simplify and all(not s.trace.steps for s in sites):
        raise TransformError(f"{fn}: body did not simplify")

    # names
    taken: set = set()
    rename_map = {}
    for d in members:
        if d.name == fn and opts.new_name is not None:
            new = opts.new_name
            if world.is_defined(new) or new in book:
                raise TransformError(f"name already in use: {new}")
        else:
            new = next_numbered_name(world, d.name, taken)
        taken.add(new)
        rename_map[d.name] = new
    if len(set(rename_map.values())) != len(rename_map):
        raise TransformError("new names collide")

    # guards and measures
    guard_traces, measure_traces = {}, {}
    new_guards, new_measures = {}, {}
    for d in members:
        new_guards[d.name], new_measures[d.name] = d.guard, d.measure
        if opts.simplify_guard and d.guard is not None:
            _, tr, _ = rewrite(d.guard, (), theory, book, world, opts.limits)
            guard_traces[d.name] = tr
            new_guards[d.name] = tr.final
        if opts.simplify_measure and d.measure is not None:
            _, tr, _ = rewrite(d.measure, (), theory, book, world, opts.limits)
            measure_traces[d.name] = tr
            new_measures[d.name] = tr.final

    # hyps function and obligations
    hyps = make_and(assumptions) if assumptions else None
    hyps_fn = None
    obligations: tuple = ()
    warnings = []
    if hyps is not None:
        hname = Sym(f"{fn}-HYPS")
        if world.is_defined(hname) or hname in taken:
            hname = next_numbered_name(world, hname, taken)
        taken.add(hname)
        hyps_fn = hyps_definition(hname, d0, hyps)
        hworld = world.extend([hyps_fn])
        hbook = book.add(hyps_rule(hyps_fn))
        htheory = replace(theory, enabled=theory.enabled | {definition_rune(hname)})
        call = App(hname, tuple(Var(f) for f in d0.formals))
        obligations = hyps_preserved_obligations(d0, call, htheory, hbook, hworld, opts.limits)
        for ob in obligations:
            if ob.discharge is None:
                msg = f"unproved obligation for the call {untranslate_plain(ob.call)}"
                if not opts.assume_obligations:
                    raise TransformError(msg)
                warnings.append(msg)

    # new definitions
    new_names = tuple(rename_map[n] for n in clique)
    pending = {rename_map[d.name]: len(d.formals) for d in members}
    new_defs, forms = [], []
    for d in members:
        new_body = rename_calls(simplified[d.name], rename_map)
        body_src = render_body(opts.untranslate, new_body, simplified[d.name], d, rename_map,
                               world, pending)
        guard_src = None if d.guard is None else _render_side(
            opts.untranslate, new_guards[d.name], d.guard, d.guard_source, world, d.formals)
        measure_src = None if d.measure is None else _render_side(
            opts.untranslate, new_measures[d.name], d.measure, d.measure_source, world, d.formals)
        nd = Definition(rename_map[d.name], d.formals, new_body, body_src,
                        new_guards[d.name], new_measures[d.name], guard_src, measure_src, new_names)
        new_defs.append(nd)
        forms.append(definition_form(nd, body_src, guard_src, measure_src))
    new_form = forms[0] if len(forms) == 1 else (MUTUAL_RECURSION,) + tuple(forms)

    # becomes theorems
    becomes = []
    for d in members:
        new = rename_map[d.name]
        if d.name == fn and opts.theorem_name is not None:
            tname = opts.theorem_name
        else:
            tname = default_theorem_name(d.name, new)
        if tname in book or world.is_defined(tname) or tname in taken:
            raise TransformError(f"name already in use: {tname}")
        taken.add(tname)
        becomes.append(Becomes(tname, becomes_statement(d, new, hyps if d.name == fn else None)))

    runes = set()
    traces = [s.trace for s in sites] + list(guard_traces.values()) + list(measure_traces.values())
    traces += [ob.discharge for ob in obligations if ob.discharge is not None]
    for tr in traces:
        runes.update(used_runes(tr))

    record = TransformRecord(
        target=fn, old_names=clique, new_names=new_names, rename_map=rename_map,
        assumptions=assumptions, hyps=hyps, hyps_fn=hyps_fn, sites=tuple(sites),
        simplified_bodies=simplified, new_defs=tuple(new_defs), new_form=new_form,
        guard_traces=guard_traces, measure_traces=measure_traces, obligations=obligations,
        becomes=tuple(becomes), used_runes=sorted(runes, key=rune_key),
        must_simplify=opts.must_simplify, warnings=warnings)
    if opts.show_only:
        return world, record
    extra = [hyps_fn] if hyps_fn is not None else []
    return world.extend(extra + list(new_defs)), record


def install_becomes(book: RuleBook, record: TransformRecord) -> RuleBook:
    """Add the record's becomes theorems to ``book`` as enabled rewrite rules."""
    for b in record.becomes:
        book = book.add(rule_from_statement(b.name, b.statement, True))
    return book
