"""``pgformat`` command line.

    pgformat convert --from pg --to json graph.pg
    pgformat convert --to neo4j graph.pg -o out/
    pgformat validate graph.json

Exit status: 0 ok, 1 invalid input, 2 usage error, 3 I/O failure.
"""

from __future__ import annotations

import argparse
import os
import sys
import tempfile
from pathlib import Path
from typing import Optional, Sequence

from .convert import TARGETS, ConversionOptions
from .diagnostics import ParseResult, SourceDiagnostic
from .jsonpg import read_json_pg, write_json_pg
from .text import parse_pg, serialize_pg

EXIT_OK, EXIT_INVALID, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3

INPUT_FORMATS = ("pg", "json")
OUTPUT_FORMATS = ("pg", "json", "neo4j", "pgx", "neptune")
_EXTENSIONS = {".pg": "pg", ".json": "json"}
_UNDIRECTED = {"keep-once": "keep-once", "duplicate": "duplicate-reversed"}
_EDGE_LABEL = {"first": "first-label", "join": "join-with-underscore"}


class _Usage(Exception):
    pass


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="pgformat", description="Convert and validate property graph files.")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p: argparse.ArgumentParser) -> None:
        p.add_argument("input", nargs="?", default="-", help="input file, '-' for standard input (default)")
        p.add_argument("--from", dest="from_format", choices=INPUT_FORMATS,
                       help="input format; inferred from .pg/.json extension when omitted")
        mode = p.add_mutually_exclusive_group()
        mode.add_argument("--strict", action="store_true",
                          help="reject quoted node IDs and edges to undeclared nodes")
        mode.add_argument("--lenient", action="store_true",
                          help="JSON-PG: downgrade unknown members to warnings, wrap bare property values")

    convert = sub.add_parser("convert", help="convert between formats")
    common(convert)
    convert.add_argument("--to", dest="to_format", choices=OUTPUT_FORMATS, required=True)
    convert.add_argument("-o", "--output", default="-",
                         help="output file ('-' for standard output) or, for neo4j/pgx/neptune, a directory")
    convert.add_argument("--undirected", choices=list(_UNDIRECTED), default="keep-once",
                         help="how undirected edges are written to directed-only targets")
    convert.add_argument("--edge-label", choices=list(_EDGE_LABEL), default="first",
                         help="how multi-label edges are reduced to one label")
    convert.add_argument("--prefix-ids", action="store_true", help="namespace node and edge ids in vendor output")

    validate = sub.add_parser("validate", help="check a file and report diagnostics")
    common(validate)
    return parser


def _input_format(args: argparse.Namespace) -> str:
    if args.from_format:
        return args.from_format
    fmt = _EXTENSIONS.get(Path(args.input).suffix.lower()) if args.input != "-" else None
    if fmt is None:
        raise _Usage("cannot infer input format; pass --from pg or --from json")
    return fmt


def _read_input(path: str) -> bytes:
    if path == "-":
        return sys.stdin.buffer.read()
    return Path(path).read_bytes()


def _decode(data: bytes) -> tuple[Optional[str], Optional[SourceDiagnostic]]:
    try:
        return data.decode("utf-8"), None
    except UnicodeDecodeError as e:
        head = data[: e.start]
        line = head.count(b"\n") + 1
        column = len(head[head.rfind(b"\n") + 1 :].decode("utf-8", "replace")) + 1
        return None, SourceDiagnostic(line, column, f"input is not valid UTF-8 (byte offset {e.start})")


def _write_dir(directory: Path, files: dict[str, bytes]) -> None:
    """Write all files or none: stage under temporary names, then rename."""
    directory.mkdir(parents=True, exist_ok=True)
    staged: list[tuple[str, Path]] = []
    moved: list[tuple[Path, Optional[str]]] = []  # (final, backup of what it replaced)
    try:
        for name, content in files.items():
            fd, tmp = tempfile.mkstemp(prefix=f".{name}.", suffix=".tmp", dir=directory)
            staged.append((tmp, directory / name))
            with os.fdopen(fd, "wb") as f:
                f.write(content)
        for tmp, final in staged:
            backup = None
            if final.exists():
                backup = tmp + ".bak"
                os.replace(final, backup)
            moved.append((final, backup))
            os.replace(tmp, final)
    except BaseException:
        for final, backup in reversed(moved):
            if final.exists():
                final.unlink()
            if backup is not None and os.path.exists(backup):
                os.replace(backup, final)
        for tmp, _ in staged:
            if os.path.exists(tmp):
                os.unlink(tmp)
        raise
    for _, backup in moved:
        if backup is not None:
            os.unlink(backup)


def _write_file(path: str, content: str) -> None:
    if path == "-":
        sys.stdout.write(content)
        sys.stdout.flush()
        return
    target = Path(path)
    fd, tmp = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as f:
            f.write(content)
        os.replace(tmp, target)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def run(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return EXIT_USAGE if e.code else EXIT_OK
    name = "<stdin>" if args.input == "-" else args.input
    try:
        fmt = _input_format(args)
        if args.command == "convert" and args.to_format in TARGETS and args.output == "-":
            raise _Usage(f"--output DIRECTORY is required for --to {args.to_format}")
    except _Usage as e:
        print(f"pgformat: error: {e}", file=sys.stderr)
        return EXIT_USAGE

    try:
        data = _read_input(args.input)
    except OSError as e:
        print(f"pgformat: error: cannot read {name}: {e.strerror or e}", file=sys.stderr)
        return EXIT_IO

    text, bad = _decode(data)
    if bad is not None:
        print(bad.format(name), file=sys.stderr)
        return EXIT_INVALID
    if fmt == "pg":
        result: ParseResult = parse_pg(text, strict=args.strict)
    else:
        result = read_json_pg(text, strict=args.strict, lenient=args.lenient)
    for d in result.diagnostics:
        print(d.format(name), file=sys.stderr)
    if result.graph is None:
        return EXIT_INVALID
    if args.command == "validate":
        return EXIT_OK

    try:
        if args.to_format == "pg":
            _write_file(args.output, serialize_pg(result.graph))
        elif args.to_format == "json":
            _write_file(args.output, write_json_pg(result.graph))
        else:
            opts = ConversionOptions(_UNDIRECTED[args.undirected], _EDGE_LABEL[args.edge_label], args.prefix_ids)
            out = TARGETS[args.to_format](result.graph, opts)
            for w in out.warnings:
                print(f"{name}: warning: {w}", file=sys.stderr)
            _write_dir(Path(args.output), out.files)
    except OSError as e:
        print(f"pgformat: error: cannot write {args.output}: {e.strerror or e}", file=sys.stderr)
        return EXIT_IO
    return EXIT_OK


def main() -> None:
    sys.exit(run())
