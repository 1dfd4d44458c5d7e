import pytest

from simpdefun.rulebook import base_book, theory_from
from simpdefun.sexpr import Sym, parse_sexpr, pformat, to_str
from simpdefun.terms import rename_fns, term_to_sexpr
from simpdefun.transform import (GUARD_TOKEN, Options, TransformError, clique_calls,
                                 collect_governors, default_theorem_name,
                                 hyps_preserved_obligations, next_numbered_name,
                                 obligation_statement, rename_calls, simplify_defun)

from conftest import F_DEFUN, before_first_transform, book_text, processed, term, world_of

MUTUAL = book_text("mutual").split("\n\n")[0]
FOO = book_text("foo").split("\n\n")[0]
G = book_text("g").split("\n\n")[0]


def raw(t):
    return to_str(term_to_sexpr(t))


def flat(form):
    return " ".join(pformat(form).split())


def run(world, fn, **kw):
    return simplify_defun(world, base_book(), Sym(fn), Options(**kw))


def test_numbered_names():
    w = world_of(F_DEFUN)
    assert next_numbered_name(w, Sym("F")) == Sym("F{1}")
    w2 = world_of(F_DEFUN, "(defun f{1} (x) x)")
    assert next_numbered_name(w2, Sym("F")) == Sym("F{2}")
    assert next_numbered_name(w, Sym("ALL-GOOD-PAIRS{1}")) == Sym("ALL-GOOD-PAIRS{2}")
    assert next_numbered_name(w, Sym("F"), taken={Sym("F{1}")}) == Sym("F{2}")


def test_governors():
    w = world_of(FOO)
    body = w[Sym("FOO")].body
    assert [raw(g) for g in collect_governors(body, (2,))] == ["(NOT (CONSP X))"]
    assert collect_governors(body, ()) == ()
    fbody = world_of(F_DEFUN)[Sym("F")].body
    (path, _), = clique_calls(fbody, (Sym("F"),))
    assert [raw(g) for g in collect_governors(fbody, path)] == ["(NOT (ZP X))"]


def test_rename_calls():
    t = term("(if (zp x) '0 (binary-+ '2 (f (binary-+ '-1 x))))", world_of(F_DEFUN))
    out = rename_calls(t, {Sym("F"): Sym("F{1}")})
    assert raw(out) == "(IF (ZP X) '0 (BINARY-+ '2 (F{1} (BINARY-+ '-1 X))))"
    w = world_of(MUTUAL)
    f1 = w[Sym("F1")].body
    assert "(F2{1} " in raw(rename_calls(f1, {Sym("F1"): Sym("F1{1}"), Sym("F2"): Sym("F2{1}")}))
    plain = term("(car (cons x y))")
    assert rename_calls(plain, {Sym("F"): Sym("F{1}")}) == plain


def test_foo_obligation_statement():
    w = world_of(FOO)
    d = w[Sym("FOO")]
    b = base_book()
    obs = hyps_preserved_obligations(d, term("(true-listp x)"), theory_from(b, w), b, w)
    assert len(obs) == 1
    assert obs[0].statement == term("(implies (and (true-listp x) (consp x)) (true-listp (cdr x)))")
    assert obs[0].discharge is not None


def test_g_has_no_obligations():
    w = world_of(G)
    b = base_book()
    assert hyps_preserved_obligations(w[Sym("G")], term("(natp x)"), theory_from(b, w), b, w) == ()


def test_f_obligation_with_natp():
    w = world_of(F_DEFUN)
    d = w[Sym("F")]
    (path, _), = clique_calls(d.body, (Sym("F"),))
    stmt = obligation_statement(d, term("(natp x)"), d.body, path)
    assert raw(stmt) == "(IMPLIES (IF (NATP X) (NOT (ZP X)) 'NIL) (NATP (BINARY-+ '-1 X)))"
    b = base_book()
    obs = hyps_preserved_obligations(d, term("(natp x)"), theory_from(b, w), b, w)
    assert obs[0].discharge is not None


def test_simplify_f():
    w, rec = run(world_of(F_DEFUN), "F")
    assert flat(rec.new_form) == "(DEFUN F{1} (X) (IF (ZP X) 0 (+ 2 (F{1} (+ -1 X)))))"
    assert [(b.name, raw(b.statement)) for b in rec.becomes] == [
        (Sym("F-BECOMES-F{1}"), "(EQUAL (F X) (F{1} X))")]
    assert Sym("F{1}") in w
    # copy-def: the inverse rename gives back the simplified old body
    new = w[Sym("F{1}")]
    assert rename_fns(new.body, {Sym("F{1}"): Sym("F")}) == rec.simplified_bodies[Sym("F")]


def test_simplify_mutual_recursion():
    w, rec = run(world_of(MUTUAL), "F1")
    assert rec.new_names == (Sym("F1{1}"), Sym("F2{1}"))
    text = flat(rec.new_form)
    assert "(DEFUN F1{1} (X) (IF (CONSP X) (NOT (F2{1} (CAR X))) T))" in text
    assert "(DEFUN F2{1} (X) (IF (CONSP X) (F1{1} (CAR X)) T))" in text
    assert [b.name for b in rec.becomes] == [Sym("F1-BECOMES-F1{1}"), Sym("F2-BECOMES-F2{1}")]


def test_simplify_g_with_pattern():
    _, rec = run(world_of(G), "G", simplify_body=parse_sexpr("(* (:@ (car (cons x y))) _)"))
    assert flat(rec.new_form) == \
        "(DEFUN G{1} (X Y) (LIST (+ (CAR (CONS X Y)) 3) (* (CAR (CONS Y Y)) 4) (* X 5)))"


def test_simplify_foo_under_guard():
    w, rec = run(world_of(FOO), "FOO", assumptions=GUARD_TOKEN)
    assert flat(rec.new_form) == ("(DEFUN FOO{1} (X) (DECLARE (XARGS :GUARD (TRUE-LISTP X))) "
                                  "(IF (CONSP X) (FOO{1} (CDR X)) NIL))")
    assert raw(rec.becomes[0].statement) == "(IMPLIES (TRUE-LISTP X) (EQUAL (FOO X) (FOO{1} X)))"
    assert rec.hyps_fn.name == Sym("FOO-HYPS")
    (ob,) = rec.obligations
    assert raw(ob.statement) == "(IMPLIES (IF (FOO-HYPS X) (CONSP X) 'NIL) (FOO-HYPS (CDR X)))"
    assert ob.discharge is not None


def test_f_fast_new_name():
    s = processed("chaining")
    assert Sym("F-FAST") in s.world
    rec = s.outcomes[-1].record
    assert flat(rec.new_form) == "(DEFUN F-FAST (X Y) (ALL-GOOD-PAIRS{2} X Y))"
    assert rec.becomes[0].name == Sym("F-BECOMES-F-FAST")


def test_default_theorem_name():
    assert default_theorem_name(Sym("F"), Sym("F{1}")) == Sym("F-BECOMES-F{1}")


def test_must_simplify():
    w = world_of(F_DEFUN)
    with pytest.raises(TransformError, match="body did not simplify"):
        run(w, "F", theory=())
    _, rec = run(w, "F", theory=(), must_simplify=False)
    assert rec.new_defs[0].body == rename_fns(w[Sym("F")].body, {Sym("F"): Sym("F{1}")})


@pytest.mark.parametrize("kw, msg", [
    (dict(enable=(Sym("NOPE"),)), "unknown rune"),
    (dict(simplify_body=parse_sexpr("(nth _ @)")), "pattern does not match body"),
    (dict(assumptions=GUARD_TOKEN), "has no guard"),
    (dict(new_name=Sym("F")), "already in use"),
    (dict(untranslate="fancy"), "unknown untranslate mode"),
])
def test_errors(kw, msg):
    with pytest.raises(TransformError, match=msg):
        run(world_of(F_DEFUN), "F", **kw)


def test_unknown_function():
    with pytest.raises(TransformError, match="not a defined function"):
        run(world_of(), "F")


def test_unproved_obligation():
    w = world_of("(defun h (x) (if (consp x) (h (cdr x)) x))")
    with pytest.raises(TransformError, match="unproved obligation"):
        run(w, "H", assumptions=(parse_sexpr("(natp x)"),), must_simplify=False)
    _, rec = run(w, "H", assumptions=(parse_sexpr("(natp x)"),), must_simplify=False,
                 assume_obligations=True)
    assert rec.obligations[0].discharge is None and rec.warnings


def test_untranslate_modes():
    w = world_of(F_DEFUN)
    _, plain = run(w, "F", untranslate="plain")
    _, rawr = run(w, "F", untranslate="raw")
    assert flat(plain.new_form) == "(DEFUN F{1} (X) (IF (ZP X) 0 (+ 2 (F{1} (+ -1 X)))))"
    assert flat(rawr.new_form) == "(DEFUN F{1} (X) (IF (ZP X) '0 (BINARY-+ '2 (F{1} (BINARY-+ '-1 X)))))"


def test_show_only_leaves_world():
    w = world_of(F_DEFUN)
    w2, _ = run(w, "F", show_only=True)
    assert w2 is w


def test_simplify_guard_and_measure():
    w = world_of("(defun h (x) (declare (xargs :guard (car (cons (natp x) x)) :measure (nth 0 (list x))))"
                 " (if (zp x) 0 (h (+ -1 x))))")
    _, rec = run(w, "H", simplify_guard=True, simplify_measure=True, must_simplify=False)
    d = rec.new_defs[0]
    assert raw(d.guard) == "(NATP X)" and raw(d.measure) == "X"
    assert Sym("H") in rec.guard_traces and Sym("H") in rec.measure_traces


def test_drawline_site_keeps_invar():
    s = before_first_transform("drawline")
    opts = Options(simplify_body=parse_sexpr("(if _ @ _)"),
                   enable=tuple(Sym(n) for n in ("ADD32-TO-+", "SUB32-TO--", "MUL32-TO--",
                                                 "LTE32-TO-<=", "GTE32-TO->=")))
    _, rec = simplify_defun(s.world, s.book, Sym("DRAWLINE-LOOP"), opts)
    assert [site.position for site in rec.sites] == [(1,)]
    assert rec.new_defs[0].body.args[0] == s.world[Sym("DRAWLINE-LOOP")].body.args[0]
