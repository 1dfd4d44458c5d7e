"""Command-line driver: ``simpdefun check BOOK`` and ``simpdefun verify CERT --world BOOK``."""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .certify import CertificateFormatError, check_certificate, format_bindings, parse_certificate
from .evaluator import DEFAULT_FUEL
from .events import EventError, Session, Settings, replay_prefix
from .sexpr import ParseError, iter_forms, pformat, to_str
from .terms import format_value


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="simpdefun", description="Simplify definitions and check the results.")
    sub = p.add_subparsers(dest="command", required=True)
    c = sub.add_parser("check", help="process a book of events")
    c.add_argument("book")
    c.add_argument("--show-only", action="store_true", help="print certificates; do not extend the world")
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--samples", type=int, default=500)
    c.add_argument("--fuel", type=int, default=DEFAULT_FUEL)
    c.add_argument("--no-difftest", action="store_true")
    c.add_argument("--assume-obligations", action="store_true",
                   help="turn unproved obligations into warnings")
    c.add_argument("--out-dir", default=".", help="where certificates are written")
    v = sub.add_parser("verify", help="check a certificate against a book")
    v.add_argument("cert")
    v.add_argument("--world", required=True, metavar="BOOK")
    return p


def _read(path: str) -> str:
    try:
        return Path(path).read_text(encoding="utf-8")
    except OSError as e:
        raise SystemExit(_fail(f"{path}: {e.strerror}"))


def _fail(msg: str) -> int:
    print(f"error: {msg}", file=sys.stderr)
    return 1


def cert_filename(name: str) -> str:
    return f"{name}.cert.sx"


def run_check(args) -> int:
    text = _read(args.book)
    settings = Settings(show_only=args.show_only, difftest=not args.no_difftest,
                        samples=args.samples, fuel=args.fuel, seed=args.seed,
                        assume_obligations=args.assume_obligations)
    session = Session(settings)
    out_dir = Path(args.out_dir)
    status = 0

    def on_outcome(out) -> int:
        rec = out.record
        if out.show_only:
            sys.stdout.write(out.certificate.render())
        elif out.print_def:
            print(pformat(rec.new_form))
        for w in rec.warnings + out.report.warnings:
            print(f"warning: {w}", file=sys.stderr)
        if not out.report.accepted:
            for line in out.report.lines():
                print(f"violation: {line}", file=sys.stderr)
            return _fail(f"certificate for {rec.new_names[0]} rejected")
        if not out.show_only:
            out_dir.mkdir(parents=True, exist_ok=True)
            path = out_dir / cert_filename(rec.new_names[0])
            path.write_text(out.certificate.render(), encoding="utf-8")
            print(f"; certificate {path.name} accepted")
        bad = 0
        for name, d in out.diffs:
            print(f"; {name}: {d.summary()}")
            for env, a, b in d.mismatches[:5]:
                print(f"mismatch: {format_bindings(env)}: old {_show(a)}, new {_show(b)}", file=sys.stderr)
            for env in d.fuel_divergent[:5]:
                print(f"fuel divergence: {format_bindings(env)}", file=sys.stderr)
            bad |= not d.ok
        if bad:
            return _fail(f"differential test failed for {rec.target}")
        return 0

    try:
        forms = list(iter_forms(text))
    except ParseError as e:
        return _fail(f"{args.book}:{e.line}: {e}")
    for form, line in forms:
        try:
            out = session.run(form)
        except EventError as e:
            return _fail(f"{args.book}:{line}: {e}")
        if out is not None:
            status = on_outcome(out)
            if status:
                return status
    return status


def _show(v) -> str:
    if isinstance(v, Exception):
        return f"error ({v})"
    return format_value(v)


def run_verify(args) -> int:
    try:
        cert = parse_certificate(_read(args.cert))
    except CertificateFormatError as e:
        return _fail(f"{args.cert}: {e}")
    try:
        session = replay_prefix(_read(args.world), cert.event_index)
    except EventError as e:
        return _fail(f"{args.world}:{e.line}: {e}")
    if session.index < cert.event_index:
        return _fail(f"{args.world} has only {session.index} events; certificate needs {cert.event_index}")
    report = check_certificate(session.world, session.book, cert)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    if not report.accepted:
        for line in report.lines():
            print(f"violation: {line}", file=sys.stderr)
        return _fail(f"certificate {args.cert} rejected")
    print(f"; certificate {Path(args.cert).name} accepted: {to_str(cert.new_names)}")
    return 0


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    if args.command == "check":
        return run_check(args)
    return run_verify(args)


if __name__ == "__main__":
    sys.exit(main())
