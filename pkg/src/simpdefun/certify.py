"""Certificates: serialization, an independent replay checker, and differential testing.

The checker never searches for rewrites.  It replays recorded steps with
``apply_rule_at``, checks executable-counterpart steps by evaluation, and
checks context hits by recomputing the governing context.  The induction
linking old and new functions is not re-proved; its syntactic core (the
inverse rename maps each new body back onto the simplified old body) is
checked exactly, and the rest is left to differential testing.
"""

from __future__ import annotations

import hashlib
from dataclasses import dataclass, field

from . import __version__
from .evaluator import DEFAULT_FUEL, EvalError, OutOfFuel, eval_term, gen_bindings
from .rewriter import (ContextHit, RewriteError, Trace, TraceStep, apply_rule_at,
                       evaluate_ground, make_context, rune_key, used_runes)
from .rulebook import DEF_KW, EC_KW, RuleBook
from .sexpr import ParseError, SExpr, Sym, parse_sexpr, pformat, to_str
from .terms import (EQUAL, IMPLIES, App, Const, InvalidPosition, Term, Var, context_at,
                    format_value, free_vars, instantiate, make_and, rename_fns, replace_at,
                    subterm, term_from_sexpr, term_to_sexpr, truthy, values_equal)
from .transform import (Becomes, SiteRecord, TransformRecord, becomes_statement, clique_calls,
                        hyps_rule, obligation_statement)
from .world import Definition, DefinitionError, World

CERTIFICATE = Sym("CERTIFICATE")
SECTIONS = ("HEADER", "ASSUMPTIONS", "HYPS-FN", "NEW-DEFINITIONS", "SITES", "SIMPLIFIED-BODIES",
            "RENAME-MAP", "GUARD-TRACES", "MEASURE-TRACES", "OBLIGATIONS", "BECOMES", "USED-RUNES")
UNPROVED = Sym("UNPROVED")
DEFUN = Sym("DEFUN")
_T, _NIL = Sym("T"), Sym("NIL")


class CertificateFormatError(ValueError):
    pass


@dataclass(frozen=True)
class NewDef:
    name: Sym
    formals: tuple
    body: Term
    guard: Term | None
    measure: Term | None


@dataclass
class Certificate:
    target: Sym
    old_names: tuple
    new_names: tuple
    options_digest: str
    event_index: int
    must_simplify: bool
    assume_obligations: bool
    assumptions: tuple
    hyps_fn: NewDef | None
    new_defs: tuple
    sites: tuple  # SiteRecord
    simplified_bodies: dict
    rename_map: dict
    guard_traces: dict
    measure_traces: dict
    obligations: tuple  # (fn, position, statement, Trace | None)
    becomes: tuple  # Becomes
    used_runes: tuple

    def to_sexpr(self) -> SExpr:
        return _cert_to_sexpr(self)

    def render(self) -> str:
        return pformat(self.to_sexpr()) + "\n"


@dataclass
class CheckReport:
    violations: list = field(default_factory=list)  # (section, position, reason)
    warnings: list = field(default_factory=list)

    @property
    def verdict(self) -> str:
        return "accepted" if not self.violations else "rejected"

    @property
    def accepted(self) -> bool:
        return not self.violations

    def add(self, section: str, position, reason: str) -> None:
        self.violations.append((section, position, reason))

    def lines(self) -> list[str]:
        return [f"{sec} {pos}: {why}" for sec, pos, why in self.violations]


# --- building ----------------------------------------------------------------

def options_digest(options_form: SExpr) -> str:
    return "SHA256-" + hashlib.sha256(to_str(options_form).encode()).hexdigest()[:32].upper()


def build_certificate(record: TransformRecord, options_form: SExpr = (), event_index: int = 0,
                      assume_obligations: bool = False) -> Certificate:
    def newdef(d: Definition) -> NewDef:
        return NewDef(d.name, d.formals, d.body, d.guard, d.measure)

    return Certificate(
        target=record.target, old_names=tuple(record.old_names), new_names=tuple(record.new_names),
        options_digest=options_digest(options_form), event_index=event_index,
        must_simplify=record.must_simplify, assume_obligations=assume_obligations,
        assumptions=tuple(record.assumptions),
        hyps_fn=newdef(record.hyps_fn) if record.hyps_fn is not None else None,
        new_defs=tuple(newdef(d) for d in record.new_defs), sites=tuple(record.sites),
        simplified_bodies=dict(record.simplified_bodies), rename_map=dict(record.rename_map),
        guard_traces=dict(record.guard_traces), measure_traces=dict(record.measure_traces),
        obligations=tuple((o.fn, o.position, o.statement, o.discharge) for o in record.obligations),
        becomes=tuple(record.becomes), used_runes=tuple(record.used_runes))


# --- serialization ---------------------------------------------------------------

def _bool(b: bool) -> Sym:
    return _T if b else _NIL


def _trace_sx(tr: Trace) -> SExpr:
    return (Sym("TRACE"), (Sym("INITIAL"), term_to_sexpr(tr.initial)),
            (Sym("STEPS"),) + tuple(_step_sx(s) for s in tr.steps),
            (Sym("FINAL"), term_to_sexpr(tr.final)),
            (Sym("LIMIT-HIT"), _bool(tr.limit_hit)))


def _step_sx(s: TraceStep) -> SExpr:
    hyps = []
    for h in s.hyps:
        hyps.append((Sym("CONTEXT"), term_to_sexpr(h.term)) if isinstance(h, ContextHit)
                    else _trace_sx(h))
    return (Sym("STEP"), (Sym("AT"),) + tuple(s.position), (Sym("RUNE"), s.rune),
            (Sym("SUBST"),) + tuple((v, term_to_sexpr(t)) for v, t in s.substitution),
            (Sym("HYPS"),) + tuple(hyps),
            (Sym("BEFORE"), term_to_sexpr(s.before)), (Sym("AFTER"), term_to_sexpr(s.after)))


def _def_sx(d: NewDef) -> SExpr:
    xargs = ()
    if d.guard is not None:
        xargs += (Sym(":GUARD"), term_to_sexpr(d.guard))
    if d.measure is not None:
        xargs += (Sym(":MEASURE"), term_to_sexpr(d.measure))
    decl = ((Sym("DECLARE"), (Sym("XARGS"),) + xargs),) if xargs else ()
    return (DEFUN, d.name, d.formals) + decl + (term_to_sexpr(d.body),)


def _cert_to_sexpr(c: Certificate) -> SExpr:
    S = Sym
    header = (S("HEADER"), (S("TOOL"), S("SIMPDEFUN")), (S("VERSION"), S(__version__)),
              (S("TARGET"), c.target), (S("OLD"),) + c.old_names, (S("NEW"),) + c.new_names,
              (S("OPTIONS-DIGEST"), S(c.options_digest)), (S("EVENT-INDEX"), c.event_index),
              (S("MUST-SIMPLIFY"), _bool(c.must_simplify)),
              (S("ASSUME-OBLIGATIONS"), _bool(c.assume_obligations)))
    return (
        CERTIFICATE,
        header,
        (S("ASSUMPTIONS"),) + tuple(term_to_sexpr(a) for a in c.assumptions),
        (S("HYPS-FN"),) + ((_def_sx(c.hyps_fn),) if c.hyps_fn else ()),
        (S("NEW-DEFINITIONS"),) + tuple(_def_sx(d) for d in c.new_defs),
        (S("SITES"),) + tuple((S("SITE"), s.fn, (S("AT"),) + tuple(s.position), _trace_sx(s.trace))
                              for s in c.sites),
        (S("SIMPLIFIED-BODIES"),) + tuple((n, term_to_sexpr(b)) for n, b in c.simplified_bodies.items()),
        (S("RENAME-MAP"),) + tuple((o, n) for o, n in c.rename_map.items()),
        (S("GUARD-TRACES"),) + tuple((n, _trace_sx(t)) for n, t in c.guard_traces.items()),
        (S("MEASURE-TRACES"),) + tuple((n, _trace_sx(t)) for n, t in c.measure_traces.items()),
        (S("OBLIGATIONS"),) + tuple(
            (S("OBLIGATION"), fn, (S("AT"),) + tuple(pos), term_to_sexpr(stmt),
             _trace_sx(tr) if tr is not None else UNPROVED)
            for fn, pos, stmt, tr in c.obligations),
        (S("BECOMES"),) + tuple((b.name, term_to_sexpr(b.statement)) for b in c.becomes),
        (S("USED-RUNES"),) + tuple(c.used_runes),
    )


def _expect(cond, what):
    if not cond:
        raise CertificateFormatError(f"malformed certificate: {what}")


def _tagged(x, tag, n=None):
    _expect(isinstance(x, tuple) and x and x[0] == tag and (n is None or len(x) == n + 1),
            f"expected ({tag} ...)")
    return x[1:]


def _term(x) -> Term:
    try:
        return term_from_sexpr(x)
    except (ValueError, TypeError) as e:
        raise CertificateFormatError(f"malformed term: {e}") from None


def _pos(x) -> tuple:
    items = _tagged(x, Sym("AT"))
    _expect(all(type(i) is int and i >= 0 for i in items), "position entries must be naturals")
    return tuple(items)


def _flag(x) -> bool:
    _expect(x in (_T, _NIL), "expected T or NIL")
    return x == _T


def _sym(x) -> Sym:
    _expect(isinstance(x, Sym), "expected a symbol")
    return x


def _rune(x):
    if isinstance(x, Sym):
        return x
    _expect(isinstance(x, tuple) and len(x) == 2 and x[0] in (EC_KW, DEF_KW)
            and isinstance(x[1], Sym), "bad rune")
    return x


def _trace(x) -> Trace:
    init, steps, final, limit = _tagged(x, Sym("TRACE"), 4)
    return Trace(_term(_tagged(init, Sym("INITIAL"), 1)[0]),
                 tuple(_step(s) for s in _tagged(steps, Sym("STEPS"))),
                 _term(_tagged(final, Sym("FINAL"), 1)[0]),
                 _flag(_tagged(limit, Sym("LIMIT-HIT"), 1)[0]))


def _step(x) -> TraceStep:
    at, rune, subst, hyps, before, after = _tagged(x, Sym("STEP"), 6)
    pairs = []
    for p in _tagged(subst, Sym("SUBST")):
        _expect(isinstance(p, tuple) and len(p) == 2, "substitution entry")
        pairs.append((_sym(p[0]), _term(p[1])))
    hs = []
    for h in _tagged(hyps, Sym("HYPS")):
        if isinstance(h, tuple) and h and h[0] == Sym("CONTEXT"):
            hs.append(ContextHit(_term(_tagged(h, Sym("CONTEXT"), 1)[0])))
        else:
            hs.append(_trace(h))
    return TraceStep(_pos(at), _rune(_tagged(rune, Sym("RUNE"), 1)[0]), tuple(pairs), tuple(hs),
                     _term(_tagged(before, Sym("BEFORE"), 1)[0]),
                     _term(_tagged(after, Sym("AFTER"), 1)[0]))


def _newdef(x) -> NewDef:
    _expect(isinstance(x, tuple) and len(x) in (4, 5) and x[0] == DEFUN, "expected (DEFUN ...)")
    name, formals = _sym(x[1]), x[2]
    _expect(isinstance(formals, tuple) and all(isinstance(f, Sym) for f in formals), "formals")
    guard = measure = None
    if len(x) == 5:
        xargs = _tagged(_tagged(x[3], Sym("DECLARE"), 1)[0], Sym("XARGS"))
        _expect(len(xargs) % 2 == 0, "xargs")
        for k, v in zip(xargs[::2], xargs[1::2]):
            _expect(k in (Sym(":GUARD"), Sym(":MEASURE")), "xargs key")
            if k == Sym(":GUARD"):
                guard = _term(v)
            else:
                measure = _term(v)
    return NewDef(name, tuple(formals), _term(x[-1]), guard, measure)


def _pairs(items, conv) -> dict:
    out = {}
    for p in items:
        _expect(isinstance(p, tuple) and len(p) == 2, "expected (NAME VALUE)")
        _expect(p[0] not in out, "duplicate entry")
        out[_sym(p[0])] = conv(p[1])
    return out


def parse_certificate(text: str) -> Certificate:
    try:
        x = parse_sexpr(text)
    except ParseError as e:
        raise CertificateFormatError(f"unreadable certificate: {e}") from None
    body = _tagged(x, CERTIFICATE, len(SECTIONS))
    secs = [_tagged(part, Sym(name)) for part, name in zip(body, SECTIONS)]
    (header, assumptions, hyps_fn, new_defs, sites, simplified, rename,
     gtraces, mtraces, obligations, becomes, runes) = secs
    h = {}
    for entry in header:
        _expect(isinstance(entry, tuple) and entry and isinstance(entry[0], Sym), "header entry")
        h[entry[0]] = entry[1:]
    try:
        target = _sym(h[Sym("TARGET")][0])
        old = tuple(_sym(n) for n in h[Sym("OLD")])
        new = tuple(_sym(n) for n in h[Sym("NEW")])
        digest = str(h[Sym("OPTIONS-DIGEST")][0])
        index = h[Sym("EVENT-INDEX")][0]
        must = _flag(h[Sym("MUST-SIMPLIFY")][0])
        assume = _flag(h[Sym("ASSUME-OBLIGATIONS")][0])
    except (KeyError, IndexError):
        raise CertificateFormatError("malformed certificate: incomplete header") from None
    _expect(type(index) is int and index >= 0, "event index")
    site_recs = []
    for s in sites:
        fn, at, tr = _tagged(s, Sym("SITE"), 3)
        site_recs.append(SiteRecord(_sym(fn), _pos(at), _trace(tr)))
    obls = []
    for o in obligations:
        fn, at, stmt, tr = _tagged(o, Sym("OBLIGATION"), 4)
        obls.append((_sym(fn), _pos(at), _term(stmt), None if tr == UNPROVED else _trace(tr)))
    _expect(len(hyps_fn) <= 1, "at most one hyps function")
    return Certificate(
        target=target, old_names=old, new_names=new, options_digest=digest, event_index=index,
        must_simplify=must, assume_obligations=assume,
        assumptions=tuple(_term(a) for a in assumptions),
        hyps_fn=_newdef(hyps_fn[0]) if hyps_fn else None,
        new_defs=tuple(_newdef(d) for d in new_defs), sites=tuple(site_recs),
        simplified_bodies=_pairs(simplified, _term),
        rename_map=_pairs(rename, _sym),
        guard_traces=_pairs(gtraces, _trace), measure_traces=_pairs(mtraces, _trace),
        obligations=tuple(obls),
        becomes=tuple(Becomes(n, t) for n, t in _pairs(becomes, _term).items()),
        used_runes=tuple(_rune(r) for r in runes))


# --- checking ----------------------------------------------------------------

class _Replayer:
    def __init__(self, world: World, book: RuleBook, report: CheckReport, extra_rules=None):
        self.world = world
        self.book = book
        self.report = report
        self.extra = dict(extra_rules or {})

    def rule(self, rune):
        if isinstance(rune, tuple):
            return self.extra.get(rune)
        return self.book.get(rune)

    def replay(self, tr: Trace, base_ctx: tuple, section: str, where) -> bool:
        """Check every step of ``tr``; record violations and return success."""
        ok = True
        cur = tr.initial
        for k, st in enumerate(tr.steps):
            loc = (where, k)
            try:
                target = subterm(cur, st.position)
            except InvalidPosition:
                self.report.add(section, loc, f"invalid position {st.position}")
                return False
            if target != st.before:
                self.report.add(section, loc, "recorded term differs from the subterm at the position")
                return False
            if isinstance(st.rune, tuple) and st.rune[0] == EC_KW:
                ok &= self.check_ec(st, section, loc)
            else:
                ok &= self.check_rule_step(cur, st, base_ctx, section, loc)
            cur = replace_at(cur, st.position, st.after)
        if cur != tr.final:
            self.report.add(section, where, "replayed steps do not produce the recorded final term")
            ok = False
        if tr.limit_hit:
            self.report.add(section, where, "trace hit the step limit")
            ok = False
        return ok

    def check_ec(self, st: TraceStep, section, loc) -> bool:
        fn = st.rune[1]
        b = st.before
        if not (isinstance(b, App) and b.fn == fn):
            self.report.add(section, loc, f"executable counterpart of {fn} applied to another call")
            return False
        if st.substitution or st.hyps:
            self.report.add(section, loc, "evaluation step carries a substitution or hypotheses")
            return False
        v = evaluate_ground(self.world, b)
        if v is None or st.after != Const(v):
            self.report.add(section, loc, f"evaluation of {fn} does not give the recorded value")
            return False
        return True

    def check_rule_step(self, cur: Term, st: TraceStep, base_ctx, section, loc) -> bool:
        rule = self.rule(st.rune)
        if rule is None:
            self.report.add(section, loc, f"unknown rune {_rune_str(st.rune)}")
            return False
        subst = dict(st.substitution)
        if len(subst) != len(st.substitution):
            self.report.add(section, loc, "substitution binds a variable twice")
            return False
        needed = free_vars(rule.lhs).union(*(free_vars(h) for h in rule.hyps))
        if set(subst) != needed:
            self.report.add(section, loc, "substitution domain does not match the rule's variables")
            return False
        try:
            after = apply_rule_at(cur, rule, st.position, subst)
        except (RewriteError, InvalidPosition) as e:
            self.report.add(section, loc, f"rule does not apply: {e}")
            return False
        if subterm(after, st.position) != st.after:
            self.report.add(section, loc, "recorded result differs from the rule instance")
            return False
        if any(not isinstance(subst[v], Const) for v in rule.constant_vars):
            self.report.add(section, loc, "syntactic constant condition fails")
            return False
        if len(st.hyps) != len(rule.hyps):
            self.report.add(section, loc, "wrong number of hypothesis justifications")
            return False
        ctx = context_at(base_ctx, cur, st.position)
        ok = True
        for j, (hyp, just) in enumerate(zip(rule.hyps, st.hyps)):
            inst = instantiate(hyp, subst)
            if isinstance(just, ContextHit):
                if just.term != inst or inst not in ctx:
                    self.report.add(section, loc + (j,), "hypothesis is not in the governing context")
                    ok = False
                continue
            if just.initial != inst:
                self.report.add(section, loc + (j,), "hypothesis trace starts from the wrong term")
                ok = False
                continue
            if not self.replay(just, ctx, section, loc + (j,)):
                ok = False
                continue
            if not (isinstance(just.final, Const) and truthy(just.final.value)):
                self.report.add(section, loc + (j,), "hypothesis trace does not end in a true constant")
                ok = False
        return ok


def _rune_str(r) -> str:
    return to_str(r) if isinstance(r, tuple) else str(r)


def _well_formed(t: Term, world: World, formals) -> str | None:
    stack = [t]
    while stack:
        u = stack.pop()
        if isinstance(u, Var):
            if u.name not in formals:
                return f"unbound variable {u.name}"
        elif isinstance(u, App):
            if world.arity(u.fn) != len(u.args):
                return f"unknown function or wrong arity: {u.fn}"
            stack.extend(u.args)
    return None


def _runes_of(c: Certificate) -> list:
    runes = set()
    traces = [s.trace for s in c.sites] + list(c.guard_traces.values()) + list(c.measure_traces.values())
    traces += [o[3] for o in c.obligations if o[3] is not None]
    for tr in traces:
        runes.update(used_runes(tr))
    return sorted(runes, key=rune_key)


def check_certificate(world: World, book: RuleBook, cert: Certificate) -> CheckReport:
    rep = CheckReport()
    c = cert
    # header: names
    if c.target not in world:
        rep.add("HEADER", (), f"target {c.target} is not defined")
        return rep
    clique = world[c.target].clique
    if tuple(c.old_names) != tuple(clique):
        rep.add("HEADER", (), "old names differ from the target's clique")
        return rep
    olds = [world[n] for n in clique]
    if set(c.rename_map) != set(clique):
        rep.add("RENAME-MAP", (), "rename map does not cover exactly the clique")
        return rep
    if tuple(c.rename_map[n] for n in clique) != tuple(c.new_names):
        rep.add("RENAME-MAP", (), "rename map disagrees with the header's new names")
    fresh = list(c.new_names) + [b.name for b in c.becomes]
    if c.hyps_fn is not None:
        fresh.append(c.hyps_fn.name)
    if len(set(fresh)) != len(fresh):
        rep.add("HEADER", (), "new names are not distinct")
    for n in fresh:
        if world.is_defined(n) or n in book:
            rep.add("HEADER", (), f"name {n} is not fresh")

    # assumptions and hyps function
    target_def = world[c.target]
    for i, a in enumerate(c.assumptions):
        err = _well_formed(a, world, target_def.formals)
        if err:
            rep.add("ASSUMPTIONS", (i,), err)
    hyps = make_and(c.assumptions) if c.assumptions else None
    if (hyps is None) != (c.hyps_fn is None):
        rep.add("HYPS-FN", (), "hyps function present iff assumptions are present")
    elif c.hyps_fn is not None:
        if c.hyps_fn.formals != target_def.formals or c.hyps_fn.body != hyps:
            rep.add("HYPS-FN", (), "hyps function does not define the conjunction of the assumptions")
    if rep.violations:
        return rep
    replayer = _Replayer(world, book, rep)
    base = make_context(c.assumptions)

    # sites
    by_fn: dict = {n: [] for n in clique}
    for i, s in enumerate(c.sites):
        if s.fn not in by_fn:
            rep.add("SITES", (i,), f"site in unknown function {s.fn}")
            continue
        by_fn[s.fn].append((i, s))
    for d in olds:
        body = d.body
        seen = []
        for i, s in by_fn[d.name]:
            if any(p[:len(s.position)] == s.position or s.position[:len(p)] == p for p in seen):
                rep.add("SITES", (i,), "overlapping sites")
                continue
            seen.append(s.position)
            try:
                original = subterm(d.body, s.position)
            except InvalidPosition:
                rep.add("SITES", (i,), f"invalid site position {s.position}")
                continue
            if s.trace.initial != original:
                rep.add("SITES", (i,), "trace does not start from the old body's subterm")
                continue
            ctx = context_at(base if d.name == c.target else (), d.body, s.position)
            replayer.replay(s.trace, ctx, "SITES", (i,))
            body = replace_at(body, s.position, s.trace.final)
        if c.simplified_bodies.get(d.name) != body:
            rep.add("SIMPLIFIED-BODIES", (d.name,), "composed site traces do not give the simplified body")
    if c.must_simplify and all(not s.trace.steps for s in c.sites):
        rep.add("SITES", (), "must-simplify recorded but no site changed")

    # new definitions: copy-def check, formals, guards, measures
    new_by_name = {d.name: d for d in c.new_defs}
    if tuple(d.name for d in c.new_defs) != tuple(c.new_names):
        rep.add("NEW-DEFINITIONS", (), "definitions do not match the new names")
    inverse = {v: k for k, v in c.rename_map.items()}
    for d in olds:
        nd = new_by_name.get(c.rename_map[d.name])
        if nd is None:
            continue
        if nd.formals != d.formals:
            rep.add("NEW-DEFINITIONS", (nd.name,), "formals differ from the old definition")
        simp = c.simplified_bodies.get(d.name)
        if simp is not None:
            if rename_fns(simp, c.rename_map) != nd.body:
                rep.add("NEW-DEFINITIONS", (nd.name,), "new body is not the renamed simplified body")
            if rename_fns(nd.body, inverse) != simp:
                rep.add("RENAME-MAP", (nd.name,), "inverse rename does not give back the simplified body")
        for label, traces, old_t, new_t in (("GUARD-TRACES", c.guard_traces, d.guard, nd.guard),
                                            ("MEASURE-TRACES", c.measure_traces, d.measure, nd.measure)):
            tr = traces.get(d.name)
            if tr is None:
                if old_t != new_t:
                    rep.add(label, (d.name,), "changed without a trace")
            elif old_t is None or tr.initial != old_t or tr.final != new_t:
                rep.add(label, (d.name,), "trace endpoints do not match old and new terms")
            else:
                replayer.replay(tr, (), label, (d.name,))

    # obligations
    if c.hyps_fn is None:
        if c.obligations:
            rep.add("OBLIGATIONS", (), "obligations without assumptions")
    else:
        hd = Definition(c.hyps_fn.name, c.hyps_fn.formals, c.hyps_fn.body, None)
        try:
            hworld = world.extend([hd])
        except DefinitionError as e:
            rep.add("HYPS-FN", (), str(e))
            hworld = None
        if hworld is not None:
            call = App(hd.name, tuple(Var(f) for f in hd.formals))
            expected = [(c.target, p, obligation_statement(target_def, call, target_def.body, p))
                        for p, _ in clique_calls(target_def.body, target_def.clique)]
            got = [(fn, pos, stmt) for fn, pos, stmt, _ in c.obligations]
            if got != expected:
                rep.add("OBLIGATIONS", (), "obligations differ from those required by the recursive calls")
            rule = hyps_rule(hd)
            orep = _Replayer(hworld, book, rep, {rule.rune: rule})
            for i, (_, _, stmt, tr) in enumerate(c.obligations):
                if tr is None:
                    if c.assume_obligations:
                        rep.warnings.append(f"obligation {i} assumed without proof")
                    else:
                        rep.add("OBLIGATIONS", (i,), "unproved obligation")
                    continue
                if tr.initial != stmt:
                    rep.add("OBLIGATIONS", (i,), "discharge trace starts from the wrong statement")
                    continue
                orep.replay(tr, (), "OBLIGATIONS", (i,))
                if not (isinstance(tr.final, Const) and truthy(tr.final.value)):
                    rep.add("OBLIGATIONS", (i,), "discharge does not end in a true constant")

    # becomes statements
    if len(c.becomes) != len(olds):
        rep.add("BECOMES", (), "one becomes statement per clique member expected")
    else:
        for d, b in zip(olds, c.becomes):
            want = becomes_statement(d, c.rename_map[d.name], hyps if d.name == c.target else None)
            if b.statement != want:
                rep.add("BECOMES", (b.name,), "statement does not equate old and new calls")

    if list(c.used_runes) != _runes_of(c):
        rep.add("USED-RUNES", (), "used runes differ from the runes cited by the traces")
    return rep


def world_after(world: World, cert: Certificate) -> World:
    """The world extended with the certificate's new definitions."""
    defs = []
    if cert.hyps_fn is not None:
        h = cert.hyps_fn
        defs.append(Definition(h.name, h.formals, h.body, None))
    for d in cert.new_defs:
        defs.append(Definition(d.name, d.formals, d.body, None, d.guard, d.measure,
                               clique=tuple(cert.new_names)))
    return world.extend(defs)


# --- differential testing ----------------------------------------------------

@dataclass
class DiffReport:
    samples: int = 0
    mismatches: list = field(default_factory=list)  # (bindings, old value, new value)
    out_of_fuel_old: int = 0
    out_of_fuel_new: int = 0
    fuel_divergent: list = field(default_factory=list)  # bindings where only one side ran out

    @property
    def ok(self) -> bool:
        return not self.mismatches and not self.fuel_divergent

    def summary(self) -> str:
        return (f"{self.samples} samples, {len(self.mismatches)} mismatches, "
                f"out of fuel old/new {self.out_of_fuel_old}/{self.out_of_fuel_new}, "
                f"{len(self.fuel_divergent)} fuel-divergent")


def split_becomes(becomes: Term):
    """``(hyp, old_call, new_call)`` from an (optionally implies-wrapped) equality."""
    hyp = None
    if isinstance(becomes, App) and becomes.fn == IMPLIES:
        hyp, becomes = becomes.args
    if not (isinstance(becomes, App) and becomes.fn == EQUAL
            and all(isinstance(a, App) for a in becomes.args)):
        raise ValueError("becomes statement is not an equality of two calls")
    return hyp, becomes.args[0], becomes.args[1]


def differential_test(world: World, becomes: Term, samples: int = 500, fuel: int = DEFAULT_FUEL,
                      seed: int = 0) -> DiffReport:
    hyp, old_call, new_call = split_becomes(becomes)
    formals = sorted(free_vars(old_call) | free_vars(new_call))
    rep = DiffReport()
    for env in gen_bindings(formals, hyp, world, seed, samples, fuel):
        rep.samples += 1
        outs = []
        for call in (old_call, new_call):
            try:
                outs.append(eval_term(world, call, env, fuel))
            except OutOfFuel:
                outs.append(OutOfFuel)
            except EvalError as e:
                outs.append(e)
        a, b = outs
        rep.out_of_fuel_old += a is OutOfFuel
        rep.out_of_fuel_new += b is OutOfFuel
        if (a is OutOfFuel) != (b is OutOfFuel):
            rep.fuel_divergent.append(env)
        elif a is not OutOfFuel and not _same(a, b):
            rep.mismatches.append((env, a, b))
    return rep


def _same(a, b) -> bool:
    if isinstance(a, Exception) or isinstance(b, Exception):
        return False
    return values_equal(a, b)


def format_bindings(env: dict) -> str:
    return " ".join(f"{k}={format_value(v)}" for k, v in sorted(env.items()))
