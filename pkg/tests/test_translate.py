import random

import pytest

from simpdefun.sexpr import Sym, parse_sexpr, to_str
from simpdefun.terms import App, Const, Var, positions, replace_at, term_to_sexpr
from simpdefun.translate import (TranslateError, define, directed_untranslate, translate,
                                 translate_annotated, untranslate_plain)
from simpdefun.world import DefinitionError, World

from conftest import F_DEFUN, term, world_of
from termgen import PRIMS, random_term

MUTUAL = """(mutual-recursion
 (defun f1 (x) (if (consp x) (not (f2 (nth 0 x))) t))
 (defun f2 (x) (if (consp x) (f1 (nth 0 x)) t)))"""


def raw(t) -> str:
    return to_str(term_to_sexpr(t))


def test_translate_f_body(f_world):
    assert raw(term("(+ 1 1 (f (+ -1 x)))", f_world)) == "(BINARY-+ '1 (BINARY-+ '1 (F (BINARY-+ '-1 X))))"


def test_translate_variable():
    assert term("x") == Var(Sym("X"))


def test_translate_quotes_t_in_f1_body():
    t = translate(parse_sexpr("(if (consp x) (not (f2 (nth 0 x))) t)"), World(), {Sym("X")},
                  pending={Sym("F2"): 1})
    assert raw(t) == "(IF (CONSP X) (NOT (F2 (NTH '0 X))) 'T)"


@pytest.mark.parametrize("src, expected", [
    ("(and a b)", "(IF A B 'NIL)"),
    ("(or a b)", "(IF A A B)"),
    ("(list a b)", "(CONS A (CONS B 'NIL))"),
    ("(<= a b)", "(NOT (< B A))"),
    ("(> a b)", "(< B A)"),
    ("(* a b c)", "(BINARY-* A (BINARY-* B C))"),
    ("(- a b)", "(BINARY-+ A (UNARY-- B))"),
    ("(and)", "'T"),
    ("nil", "'NIL"),
    ("'(1 2)", "'(1 2)"),
])
def test_sugar(src, expected):
    assert raw(term(src)) == expected


def test_and_collapses_to_if():
    assert term("(and a b)") == term("(if a b nil)")


@pytest.mark.parametrize("src", ["(car x y)", "(nope x)", "(if x y)", "(quote)", "(f . x)"])
def test_translate_errors(src, f_world):
    with pytest.raises((TranslateError, ValueError)):
        term(src, f_world)


def test_untranslate_or_of_negation():
    t = translate(parse_sexpr("(if (consp x) (not (f2 (car x))) 't)"), World(), {Sym("X")},
                  pending={Sym("F2"): 1})
    assert to_str(untranslate_plain(t)) == "(OR (NOT (CONSP X)) (NOT (F2 (CAR X))))"


def test_untranslate_plain_basics(f_world):
    assert untranslate_plain(Var(Sym("X"))) == Sym("X")
    t = App(Sym("BINARY-+"), (Const(2), App(Sym("F"), (Var(Sym("X")),))))
    assert to_str(untranslate_plain(t)) == "(+ 2 (F X))"


def test_directed_keeps_if_and_t():
    src = parse_sexpr("(if (consp x) (not (f2 (nth 0 x))) t)")
    pending = {Sym("F2"): 1, Sym("F2{1}"): 1}
    old = translate(src, World(), {Sym("X")}, pending=pending)
    new = translate(parse_sexpr("(if (consp x) (not (f2{1} (car x))) t)"), World(), {Sym("X")},
                    pending=pending)
    out = directed_untranslate(new, old, src, World(), {Sym("X")}, pending)
    assert to_str(out) == "(IF (CONSP X) (NOT (F2{1} (CAR X))) T)"


def test_directed_on_f_body():
    w = world_of(F_DEFUN, "(defun f{1} (x) (f x))")
    d = w[Sym("F")]
    new = term("(if (zp x) 0 (+ 2 (f{1} (+ -1 x))))", w)
    assert to_str(directed_untranslate(new, d.body, d.source_body, w, d.formals)) == \
        "(IF (ZP X) 0 (+ 2 (F{1} (+ -1 X))))"


def test_directed_unchanged_returns_source(f_world):
    d = f_world[Sym("F")]
    assert directed_untranslate(d.body, d.body, d.source_body, f_world, d.formals) == d.source_body


def test_define_f(f_world):
    d = f_world[Sym("F")]
    assert d.formals == (Sym("X"),)
    assert raw(d.body) == "(IF (ZP X) '0 (BINARY-+ '1 (BINARY-+ '1 (F (BINARY-+ '-1 X)))))"


def test_define_mutual_recursion():
    w = world_of(MUTUAL)
    assert w[Sym("F1")].clique == (Sym("F1"), Sym("F2"))
    assert w[Sym("F2")].clique == (Sym("F1"), Sym("F2"))


@pytest.mark.parametrize("src, msg", [
    (F_DEFUN, "name already defined"),
    ("(defun g (x) (h x))", "unknown function"),
    ("(defun g (x x) x)", "duplicate formals"),
    ("(defun g (x) (declare (xargs :hints nil)) x)", "unsupported declare field"),
    ("(defun g (x) y)", "unbound variable"),
    ("(defun g (x) (f x x))", "expects 1 argument"),
])
def test_define_errors(f_world, src, msg):
    with pytest.raises(DefinitionError, match=msg):
        define(f_world, parse_sexpr(src))


def test_guard_and_measure_are_kept():
    w = world_of("(defun g (x) (declare (xargs :guard (natp x) :measure (len x))) x)")
    d = w[Sym("G")]
    assert raw(d.guard) == "(NATP X)" and raw(d.measure) == "(LEN X)"


# --- round-trip properties ----------------------------------------------------

_W = world_of("(defun u1 (x) x)", "(defun u2 (x y) (cons x y))")
_FNS = {**PRIMS, "U1": 1, "U2": 2}
_BOUND = {Sym("X"), Sym("Y"), Sym("Z")}


def _terms(seed, n):
    rng = random.Random(seed)
    return [random_term(rng, depth=5, fns=_FNS) for _ in range(n)]


def test_untranslate_round_trip_1000_terms():
    for t in _terms(1, 1000):
        src = untranslate_plain(t)
        assert translate(src, _W, _BOUND) == t, to_str(src)
        assert translate(parse_sexpr(to_str(src)), _W, _BOUND) == t
        assert translate(term_to_sexpr(t), _W, _BOUND) == t


def test_directed_round_trip_against_any_guide():
    rng = random.Random(2)
    olds = _terms(4, 600)
    news = _terms(3, 300)
    # the other half are small edits of their guide, which exercises the parallel walk
    for old in olds[300:]:
        path, _ = rng.choice(list(positions(old)))
        news.append(replace_at(old, path, random_term(rng, depth=2, fns=_FNS)))
    for new, old in zip(news, olds):
        guide = untranslate_plain(old) if rng.random() < 0.5 else term_to_sexpr(old)
        out = directed_untranslate(new, old, guide, _W, _BOUND)
        assert translate(out, _W, _BOUND) == new


def test_directed_identity_is_source():
    for t in _terms(5, 300):
        src = untranslate_plain(t)
        assert directed_untranslate(t, t, src, _W, _BOUND) == src


def test_annotated_translation_agrees():
    for t in _terms(6, 100):
        src = untranslate_plain(t)
        assert translate_annotated(src, _W, _BOUND)[0] == t
