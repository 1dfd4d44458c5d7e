"""Processing of book events: definitions, rules, theory changes, and transformations."""

from __future__ import annotations

from dataclasses import dataclass, field

from .certify import (Certificate, CheckReport, build_certificate, check_certificate,
                      differential_test, world_after)
from .evaluator import DEFAULT_FUEL
from .rulebook import DEFTHM, DEFTHMD, RuleError, add_rule, base_book, parse_rune
from .sexpr import SExpr, Sym, iter_forms, ParseError
from .transform import (GUARD_TOKEN, Options, TransformError, TransformRecord, install_becomes,
                        simplify_defun)
from .translate import DEFUN, MUTUAL_RECURSION, TranslateError, define
from .world import DefinitionError, World

SIMPLIFY_DEFUN = Sym("SIMPLIFY-DEFUN")
IN_THEORY = Sym("IN-THEORY")
ENABLE, DISABLE = Sym("ENABLE"), Sym("DISABLE")
_T, _NIL = Sym("T"), Sym("NIL")

_UNTRANSLATE = {Sym("DIRECTED"): "directed", Sym(":DIRECTED"): "directed", _T: "directed",
                Sym("PLAIN"): "plain", Sym(":PLAIN"): "plain",
                Sym("RAW"): "raw", Sym(":RAW"): "raw", _NIL: "raw"}


class EventError(Exception):
    def __init__(self, message: str, line: int | None = None):
        super().__init__(message)
        self.line = line


@dataclass
class Outcome:
    """Result of one simplify-defun event."""
    record: TransformRecord
    certificate: Certificate
    report: CheckReport
    diffs: list = field(default_factory=list)  # (theorem name, DiffReport)
    show_only: bool = False
    print_def: bool = True

    @property
    def ok(self) -> bool:
        return self.report.accepted and all(d.ok for _, d in self.diffs)


@dataclass
class Settings:
    show_only: bool = False
    difftest: bool = True
    samples: int = 500
    fuel: int = DEFAULT_FUEL
    seed: int = 0
    assume_obligations: bool = False


def _flag(v, key) -> bool:
    if v not in (_T, _NIL):
        raise EventError(f"{key} expects t or nil")
    return v == _T


def _name(v, key) -> Sym:
    if not isinstance(v, Sym) or v.is_keyword or v in (_T, _NIL):
        raise EventError(f"{key} expects a symbol")
    return v


def _runes(v) -> tuple:
    if v == _NIL:
        return ()
    if isinstance(v, tuple) and not (len(v) == 2 and isinstance(v[0], Sym) and v[0].is_keyword):
        return v
    return (v,)


def _assumptions(v):
    if v == GUARD_TOKEN:
        return GUARD_TOKEN
    if v == _NIL:
        return None
    # a list whose first element is itself a list is a list of terms
    if isinstance(v, tuple) and v and isinstance(v[0], tuple):
        return v
    return (v,)


def parse_options(args: tuple, settings: Settings) -> tuple[Options, bool]:
    """Options for a simplify-defun event; also returns the effective show-only flag."""
    if len(args) % 2:
        raise EventError("options must be keyword/value pairs")
    kw: dict = {}
    seen = set()
    for key, val in zip(args[::2], args[1::2]):
        if not (isinstance(key, Sym) and key.is_keyword):
            raise EventError(f"expected a keyword, found {key}")
        if key in seen:
            raise EventError(f"duplicate option {key}")
        seen.add(key)
        k = str(key)
        if k == ":ASSUMPTIONS":
            kw["assumptions"] = _assumptions(val)
        elif k == ":SIMPLIFY-BODY":
            if val in (_T, _NIL):
                if val == _NIL:
                    raise EventError(":simplify-body nil is not supported")
            else:
                kw["simplify_body"] = val
        elif k == ":SIMPLIFY-GUARD":
            kw["simplify_guard"] = _flag(val, k)
        elif k == ":SIMPLIFY-MEASURE":
            kw["simplify_measure"] = _flag(val, k)
        elif k == ":NEW-NAME":
            kw["new_name"] = _name(val, k)
        elif k == ":THEOREM-NAME":
            kw["theorem_name"] = _name(val, k)
        elif k == ":MUST-SIMPLIFY":
            kw["must_simplify"] = _flag(val, k)
        elif k == ":UNTRANSLATE":
            if val not in _UNTRANSLATE:
                raise EventError(f"unknown :untranslate mode {val}")
            kw["untranslate"] = _UNTRANSLATE[val]
        elif k == ":SHOW-ONLY":
            kw["show_only"] = _flag(val, k)
        elif k == ":PRINT-DEF":
            kw["print_def"] = _flag(val, k)
        elif k == ":THEORY":
            kw["theory"] = _runes(val)
        elif k == ":ENABLE":
            kw["enable"] = _runes(val)
        elif k == ":DISABLE":
            kw["disable"] = _runes(val)
        else:
            raise EventError(f"unsupported option {key}")
    kw["assume_obligations"] = settings.assume_obligations
    opts = Options(**kw)
    return opts, opts.show_only or settings.show_only


class Session:
    """Threads the world and rule book through a sequence of events."""

    def __init__(self, settings: Settings | None = None):
        self.settings = settings or Settings()
        self.world = World()
        self.book = base_book()
        self.index = 0
        self.outcomes: list[Outcome] = []

    def run_text(self, text: str, limit: int | None = None) -> None:
        """Process every form in ``text`` (or only the first ``limit``)."""
        try:
            forms = list(iter_forms(text))
        except ParseError as e:
            raise EventError(str(e), e.line) from None
        for form, line in forms:
            if limit is not None and self.index >= limit:
                return
            try:
                self.run(form)
            except EventError as e:
                if e.line is None:
                    e.line = line
                raise

    def run(self, form: SExpr) -> Outcome | None:
        if not (isinstance(form, tuple) and form and isinstance(form[0], Sym)):
            raise EventError("expected an event form")
        head = form[0]
        try:
            if head in (DEFUN, MUTUAL_RECURSION):
                self.world = define(self.world, form)
            elif head in (DEFTHM, DEFTHMD):
                self.book = add_rule(self.book, form, self.world)
            elif head == IN_THEORY:
                self.in_theory(form)
            elif head == SIMPLIFY_DEFUN:
                out = self.simplify(form)
                self.index += 1
                return out
            else:
                raise EventError(f"unknown event {head}")
        except (DefinitionError, RuleError, TranslateError, TransformError) as e:
            raise EventError(str(e)) from None
        self.index += 1
        return None

    def in_theory(self, form) -> None:
        if len(form) != 2 or not (isinstance(form[1], tuple) and form[1] and form[1][0] in (ENABLE, DISABLE)):
            raise EventError("expected (in-theory (enable ...)) or (in-theory (disable ...))")
        rules, ecs = [], []
        for x in form[1][1:]:
            kind, name = parse_rune(x)
            if kind == "ec" and not self.world.is_defined(name):
                raise EventError(f"unknown function {name}")
            (ecs if kind == "ec" else rules).append(name)
        if form[1][0] == ENABLE:
            self.book = self.book.set_defaults(enable=rules, ec_enable=ecs)
        else:
            self.book = self.book.set_defaults(disable=rules, ec_disable=ecs)

    def simplify(self, form) -> Outcome:
        if len(form) < 2 or not isinstance(form[1], Sym):
            raise EventError("expected (simplify-defun fn :option value ...)")
        opts, show_only = parse_options(form[2:], self.settings)
        world_before, book_before = self.world, self.book
        new_world, record = simplify_defun(world_before, book_before, form[1], opts)
        cert = build_certificate(record, form, self.index, opts.assume_obligations)
        report = check_certificate(world_before, book_before, cert)
        out = Outcome(record, cert, report, show_only=show_only, print_def=opts.print_def)
        if self.settings.difftest:
            after = world_after(world_before, cert)
            for b in record.becomes:
                out.diffs.append((b.name, differential_test(after, b.statement, self.settings.samples,
                                                            self.settings.fuel, self.settings.seed)))
        if not show_only:
            self.world = new_world
            self.book = install_becomes(book_before, record)
        self.outcomes.append(out)
        return out


def replay_prefix(text: str, count: int) -> Session:
    """A session that has processed the first ``count`` events of ``text``."""
    s = Session(Settings(difftest=False, assume_obligations=True))
    s.run_text(text, limit=count)
    return s
