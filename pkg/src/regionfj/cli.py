"""``regionfj analyze``: run region inference on one ``.fj`` file.

Exit codes: 0 success, 1 unreadable input or parse/validation error,
2 checker diagnostics under ``--check``, 3 an iteration or context cap hit.
"""

from __future__ import annotations

import argparse
import os
import sys
from typing import List, Optional, TextIO

from .checker import check_well_typed
from .inference import (
    DEFAULT_MAX_CONTEXTS,
    DEFAULT_MAX_ITER,
    CapExceeded,
    compute_class_table,
    compute_method_table,
)
from .output import build_document, dump_json, render_text
from .parser import FJSyntaxError, parse_program

EXIT_OK, EXIT_INPUT, EXIT_CHECK, EXIT_CAP = 0, 1, 2, 3


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):  # usage errors share the input-error code
        raise _UsageError(f"{self.prog}: error: {message}")


def _positive(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}") from None
    if n <= 0:
        raise argparse.ArgumentTypeError(f"must be positive: {n}")
    return n


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="regionfj", description="Region type inference for Featherweight Java.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    a = sub.add_parser("analyze", help="infer region types for a .fj file")
    a.add_argument("file", help="source file")
    a.add_argument("--emit", choices=("types", "summaries", "all"), default="types")
    a.add_argument("--format", choices=("text", "json"), default="text")
    a.add_argument("--check", action="store_true", help="validate the inferred table")
    a.add_argument("--max-iter", type=_positive, default=DEFAULT_MAX_ITER)
    a.add_argument("--max-contexts", type=_positive, default=DEFAULT_MAX_CONTEXTS)
    a.add_argument("--stats", action="store_true", help="include analysis counters")
    return p


def _use_color(stream: TextIO) -> bool:
    if os.environ.get("REGIONFJ_COLOR") == "0":
        return False
    return hasattr(stream, "isatty") and stream.isatty()


def run(argv: Optional[List[str]] = None, stdout: TextIO = None, stderr: TextIO = None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    try:
        args = build_parser().parse_args(argv)
    except _UsageError as exc:
        print(exc, file=stderr)
        return EXIT_INPUT
    except SystemExit as exc:  # --help
        return int(exc.code or 0)

    try:
        with open(args.file, encoding="utf-8") as fh:
            source = fh.read()
    except (OSError, UnicodeDecodeError) as exc:
        print(f"{args.file}: cannot read: {exc}", file=stderr)
        return EXIT_INPUT

    try:
        program = parse_program(source)
    except FJSyntaxError as exc:
        for d in exc.diagnostics:
            print(f"{args.file}:{d.line}:{d.col}: {d.message}", file=stderr)
        return EXIT_INPUT

    try:
        T = compute_method_table(program, args.max_iter)
        ct = compute_class_table(program, T, args.max_iter, args.max_contexts)
    except CapExceeded as exc:
        print(f"{args.file}: {exc}", file=stderr)
        return EXIT_CAP

    doc = build_document(T, ct, args.emit, args.stats)
    if args.format == "json":
        stdout.write(dump_json(doc))
    else:
        stdout.write(render_text(doc, color=_use_color(stdout)))

    if args.check:
        diags = check_well_typed(program, ct)
        for d in diags:
            print(f"{args.file}: {d}", file=stderr)
        if diags:
            return EXIT_CHECK
    return EXIT_OK


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
