import time
from functools import lru_cache
from pathlib import Path

import pytest

from simpdefun.events import Session, Settings
from simpdefun.rulebook import base_book
from simpdefun.sexpr import parse_sexpr
from simpdefun.translate import define, expression_vars, translate
from simpdefun.world import World

BOOKS = Path(__file__).parent / "books"
BOOK_NAMES = ("f", "mutual", "g", "foo", "chaining", "drawline")

F_DEFUN = "(defun f (x) (if (zp x) 0 (+ 1 1 (f (+ -1 x)))))"


def book_text(name: str) -> str:
    return (BOOKS / f"{name}.sx").read_text()


@lru_cache(maxsize=None)
def processed(name: str) -> Session:
    """The session after running a fixture book with full differential testing.

    Cached: the F book alone spends a few seconds on out-of-fuel samples.
    """
    s = Session(Settings())
    s.run_text(book_text(name))
    return s


def before_first_transform(name: str) -> Session:
    """A session that has run a fixture book up to its first simplify-defun."""
    text = book_text(name)
    s = Session(Settings(difftest=False))
    s.run_text(text[:text.index("(simplify-defun")])
    return s


def world_of(*defuns: str) -> World:
    w = World()
    for text in defuns:
        w = define(w, parse_sexpr(text))
    return w


def term(text: str, world: World | None = None, bound=None):
    form = parse_sexpr(text)
    if bound is None:
        bound = expression_vars(form)
    return translate(form, world or World(), bound)


@pytest.fixture
def f_world():
    return world_of(F_DEFUN)


@pytest.fixture
def book():
    return base_book()


# --- acceptance report --------------------------------------------------------

ACCEPTANCE: dict = {}  # criterion number -> (passed, detail)
SUITE_BUDGET = 30.0
_started = time.monotonic()


def record(n: int, passed: bool, detail: str) -> None:
    ACCEPTANCE[n] = (passed, detail)
    print(f"criterion {n}: {'PASS' if passed else 'FAIL'} ({detail})")


def pytest_sessionstart(session):
    global _started
    _started = time.monotonic()


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    elapsed = time.monotonic() - _started
    tr = terminalreporter
    tr.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        passed, detail = ACCEPTANCE[n]
        if n == 6:
            passed = passed and elapsed < SUITE_BUDGET
            detail += f"; whole run {elapsed:.1f} s, budget {SUITE_BUDGET:.0f} s"
        tr.write_line(f"criterion {n}: {'PASS' if passed else 'FAIL'} ({detail})")
