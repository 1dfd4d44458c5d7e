import re

import pytest
from hypothesis import given, settings, strategies as st

from simpdefun.sexpr import ParseError, Sym, iter_forms, parse_sexpr, parse_sexprs, pformat, to_str

_INT = re.compile(r"[+-]?\d+\Z")

symbols = st.text("ABXYZ-+*<=>:{}12_@%", min_size=1, max_size=6).filter(
    lambda s: not _INT.match(s)).map(Sym)
atoms = st.one_of(st.integers(-2**40, 2**40), symbols)
sexprs = st.recursive(atoms, lambda kids: st.lists(kids, max_size=5).map(tuple), max_leaves=30)


def test_defun_reads_as_four_element_list():
    forms = parse_sexprs("(defun f (x) (if (zp x) 0 (+ 1 1 (f (+ -1 x)))))")
    assert len(forms) == 1
    form = forms[0]
    assert len(form) == 4
    assert form[0] == Sym("DEFUN") and form[2] == (Sym("X"),)
    assert form[3][3] == (Sym("+"), 1, 1, (Sym("F"), (Sym("+"), -1, Sym("X"))))


def test_empty_input():
    assert parse_sexprs("") == []
    assert parse_sexprs("  ; only a comment\n") == []


def test_unbalanced_offset():
    with pytest.raises(ParseError) as e:
        parse_sexprs("(a (b")
    assert e.value.offset == 5


@pytest.mark.parametrize("text", [")", "(a))", "\"str\"", "(a #b)"])
def test_malformed(text):
    with pytest.raises(ParseError):
        parse_sexprs(text)


def test_symbols_fold_to_upper_case():
    assert parse_sexpr("Foo-Bar") == "FOO-BAR"
    assert isinstance(parse_sexpr("x"), Sym)


def test_quote_shorthand_round_trips():
    x = parse_sexpr("'(a 1)")
    assert x == (Sym("QUOTE"), (Sym("A"), 1))
    assert to_str(x) == "'(A 1)"


def test_integers_and_signs():
    assert parse_sexpr("(-3 +4 1-)") == (-3, 4, Sym("1-"))


def test_forms_carry_line_numbers():
    text = "(a)\n; c\n(b\n c)\n"
    assert [line for _, line in iter_forms(text)] == [1, 3]


def test_pformat_breaks_long_defun():
    form = parse_sexpr("(defun long-name (aaaa bbbb) (if (consp aaaa) (long-name (cdr aaaa) (cons (car aaaa) bbbb)) bbbb))")
    out = pformat(form, width=40)
    assert out.startswith("(DEFUN LONG-NAME (AAAA BBBB)\n")
    assert all(len(line) <= 60 for line in out.splitlines())
    assert parse_sexpr(out) == form


@settings(max_examples=300, deadline=None)
@given(sexprs)
def test_print_parse_round_trip(x):
    assert parse_sexpr(to_str(x)) == x
    assert parse_sexpr(pformat(x, width=20)) == x
