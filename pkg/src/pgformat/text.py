"""Flat-text PG format: one node or edge per line, whitespace-separated fields.

    101  :Person  name:Alice  country:"United States"
    101 -> 102  :likes  since:2015

A line whose second field is ``--`` or ``->`` is an edge, anything else is a
node.  Labels (``:name``) come before properties (``key:value``).  Double
quotes protect whitespace, ``#`` and ``:``; inside quotes only ``\\"`` and
``\\\\`` are escapes.  An unquoted ``#`` starts a comment.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import Optional, Union

from .diagnostics import ParseResult, PGSyntaxError, SourceDiagnostic
from .model import INT64_MAX, INT64_MIN, NodeId, PropertyGraph, Value

DIRECTIONS = {"--": True, "->": False}  # token -> undirected

_UNQUOTED = re.compile(r'[^ \t"#]+')
_QUOTED = re.compile(r'"((?:[^"\\]|\\["\\])*)"')
_ESCAPE = re.compile(r'\\(["\\])')
_INT = re.compile(r"-?[0-9]+\Z")
_NUMBER = re.compile(r"-?[0-9]+(?:\.[0-9]+)?(?:[eE][+-]?[0-9]+)?\Z")
_NEEDS_QUOTES = re.compile(r'[\s"#:]')
_ARROWISH = re.compile(r"[<>=-]+\Z")


@dataclass(frozen=True)
class Segment:
    text: str  # unescaped content
    quoted: bool
    column: int  # 1-based; the opening quote for quoted segments


@dataclass(frozen=True)
class Field:
    raw: str
    column: int
    segments: tuple[Segment, ...]

    @property
    def text(self) -> str:
        return "".join(s.text for s in self.segments)

    @property
    def quoted(self) -> bool:
        return any(s.quoted for s in self.segments)

    @property
    def is_label(self) -> bool:
        first = self.segments[0]
        return not first.quoted and first.text.startswith(":")

    def find_colon(self) -> Optional[int]:
        """Segment index holding the first unquoted colon, or None."""
        for i, seg in enumerate(self.segments):
            if not seg.quoted and ":" in seg.text:
                return i
        return None

    def split_colon(self) -> Optional[tuple[list[Segment], int, list[Segment]]]:
        """Split at the first unquoted colon into (left, colon_column, right)."""
        i = self.find_colon()
        if i is None:
            return None
        seg = self.segments[i]
        at = seg.text.index(":")
        left = list(self.segments[:i])
        if at:
            left.append(Segment(seg.text[:at], False, seg.column))
        right = []
        if at + 1 < len(seg.text):
            right.append(Segment(seg.text[at + 1 :], False, seg.column + at + 1))
        right.extend(self.segments[i + 1 :])
        return left, seg.column + at, right


@dataclass
class NodeRecord:
    id: NodeId
    labels: list[str] = field(default_factory=list)
    properties: list[tuple[str, Value]] = field(default_factory=list)
    column: int = 1


@dataclass
class EdgeRecord:
    source: NodeId
    destination: NodeId
    undirected: bool
    labels: list[str] = field(default_factory=list)
    properties: list[tuple[str, Value]] = field(default_factory=list)
    source_column: int = 1
    destination_column: int = 1


Record = Union[NodeRecord, EdgeRecord]


def _quote_error(line: str, start: int) -> None:
    i = start + 1
    while i < len(line):
        c = line[i]
        if c == "\\":
            if i + 1 < len(line) and line[i + 1] not in '"\\':
                raise PGSyntaxError(i + 1, f"invalid escape sequence '\\{line[i + 1]}' (only \\\" and \\\\ are allowed)")
            i += 2
            continue
        if c == '"':
            break
        i += 1
    raise PGSyntaxError(start + 1, "unterminated quoted string")


def tokenize_line(raw_line: str) -> list[Field]:
    """Split one line into fields.  Raises PGSyntaxError on bad quoting."""
    fields: list[Field] = []
    segs: list[Segment] = []
    start = 0
    pos = 0
    n = len(raw_line)
    while pos < n:
        c = raw_line[pos]
        if c == " " or c == "\t":
            if segs:
                fields.append(Field(raw_line[start:pos], start + 1, tuple(segs)))
                segs = []
            pos += 1
            continue
        if c == "#":
            break
        if not segs:
            start = pos
        if c == '"':
            m = _QUOTED.match(raw_line, pos)
            if m is None:
                _quote_error(raw_line, pos)
            segs.append(Segment(_ESCAPE.sub(r"\1", m.group(1)), True, pos + 1))
        else:
            m = _UNQUOTED.match(raw_line, pos)
            segs.append(Segment(m.group(), False, pos + 1))
        pos = m.end()
    if segs:
        fields.append(Field(raw_line[start:pos], start + 1, tuple(segs)))
    return fields


def parse_value(raw: str, quoted: bool) -> Value:
    """Lex a property value.  Raises ValueError for out-of-range numbers."""
    if quoted:
        return raw
    if not raw:
        raise ValueError("empty property value")
    if _INT.match(raw):
        v = int(raw)
        if not INT64_MIN <= v <= INT64_MAX:
            raise ValueError(f"integer value out of 64-bit range: {raw}")
        return v
    if _NUMBER.match(raw):
        f = float(raw)
        if not math.isfinite(f):
            raise ValueError(f"float value out of range: {raw}")
        return f
    return raw


def _parse_id(f: Field, strict: bool, role: str) -> NodeId:
    if f.is_label:
        raise PGSyntaxError(f.column, f"expected {role} node ID, found label {f.raw!r}")
    if f.find_colon() is not None:
        raise PGSyntaxError(f.column, f"expected {role} node ID, found {f.raw!r} (node IDs cannot contain an unquoted ':')")
    if f.quoted:
        if strict:
            raise PGSyntaxError(f.column, f"quoted node ID {f.raw} is not allowed in strict mode")
        if not f.text:
            raise PGSyntaxError(f.column, "empty node ID")
        return f.text
    text = f.text
    if _INT.match(text):
        v = int(text)
        if not INT64_MIN <= v <= INT64_MAX:
            raise PGSyntaxError(f.column, f"node ID out of 64-bit range: {text}")
        return v
    return text


def _parse_body(fields: list[Field], labels: list[str], props: list[tuple[str, Value]]) -> None:
    seen_property: Optional[Field] = None
    for f in fields:
        if f.is_label:
            if seen_property is not None:
                raise PGSyntaxError(
                    f.column, f"label {f.raw!r} after property {seen_property.raw!r}; labels must precede properties"
                )
            name = f.text[1:]
            if not name:
                raise PGSyntaxError(f.column, "empty label")
            labels.append(name)
            continue
        split = f.split_colon()
        if split is None:
            raise PGSyntaxError(f.column, f"unexpected field {f.raw!r}: expected a label (:name) or a property (key:value)")
        left, colon_col, right = split
        key = "".join(s.text for s in left)
        if not key:
            raise PGSyntaxError(f.column, "empty property key")
        if not right:
            raise PGSyntaxError(colon_col, f"missing value for property {key!r}")
        raw = "".join(s.text for s in right)
        try:
            value = parse_value(raw, any(s.quoted for s in right))
        except ValueError as e:
            raise PGSyntaxError(right[0].column, str(e)) from None
        props.append((key, value))
        seen_property = f


def parse_statement(fields: list[Field], strict: bool = False) -> Record:
    """Turn the fields of one non-blank line into a node or edge record."""
    if not fields:
        raise ValueError("parse_statement needs at least one field")
    second = fields[1] if len(fields) > 1 else None
    if second is not None and not second.quoted and second.text in DIRECTIONS:
        if len(fields) < 3:
            raise PGSyntaxError(second.column, "edge missing destination node ID")
        source = _parse_id(fields[0], strict, "source")
        destination = _parse_id(fields[2], strict, "destination")
        rec = EdgeRecord(
            source, destination, DIRECTIONS[second.text],
            source_column=fields[0].column, destination_column=fields[2].column,
        )
        _parse_body(fields[3:], rec.labels, rec.properties)
        return rec
    if second is not None and not second.quoted and _ARROWISH.match(second.text):
        raise PGSyntaxError(second.column, f"invalid edge direction {second.raw!r} (expected '--' or '->')")
    rec = NodeRecord(_parse_id(fields[0], strict, "a"), column=fields[0].column)
    _parse_body(fields[1:], rec.labels, rec.properties)
    return rec


def _properties(pairs: list[tuple[str, Value]]) -> dict[str, list[Value]]:
    out: dict[str, list[Value]] = {}
    for key, value in pairs:
        out.setdefault(key, []).append(value)
    return out


def parse_pg(text: str, strict: bool = False) -> ParseResult:
    """Parse a whole PG document, collecting one diagnostic per bad line.

    With ``strict``, quoted node IDs are rejected and every edge endpoint
    must be declared by a node line somewhere in the document.
    """
    graph = PropertyGraph()
    diagnostics: list[SourceDiagnostic] = []
    declared: set = set()
    endpoints: list[tuple[int, int, NodeId]] = []
    if text.startswith("\ufeff"):
        text = text[1:]
    for lineno, line in enumerate(text.split("\n"), 1):
        if line.endswith("\r"):
            line = line[:-1]
        try:
            fields = tokenize_line(line)
            if not fields:
                continue
            rec = parse_statement(fields, strict)
        except PGSyntaxError as e:
            diagnostics.append(SourceDiagnostic(lineno, e.column, e.message))
            continue
        try:
            if isinstance(rec, NodeRecord):
                graph.merge_node(rec.id, rec.labels, _properties(rec.properties))
                declared.add((type(rec.id), rec.id))
            else:
                graph.add_edge(rec.source, rec.destination, rec.undirected, rec.labels, _properties(rec.properties))
                endpoints.append((lineno, rec.source_column, rec.source))
                endpoints.append((lineno, rec.destination_column, rec.destination))
        except (TypeError, ValueError) as e:
            diagnostics.append(SourceDiagnostic(lineno, fields[0].column, str(e)))
    if strict:
        for lineno, col, node_id in endpoints:
            if (type(node_id), node_id) not in declared:
                diagnostics.append(SourceDiagnostic(lineno, col, f"edge endpoint {node_id!r} is not declared by a node line"))
        diagnostics.sort(key=lambda d: (d.line, d.column))
    if any(d.severity == "error" for d in diagnostics):
        return ParseResult(None, diagnostics)
    return ParseResult(graph, diagnostics)


def _quote(s: str) -> str:
    return '"' + s.replace("\\", "\\\\").replace('"', '\\"') + '"'


def format_id(node_id: NodeId) -> str:
    if isinstance(node_id, int):
        return str(node_id)
    if _NEEDS_QUOTES.search(node_id) or _INT.match(node_id):
        return _quote(node_id)
    return node_id


def format_value(value: Value) -> str:
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        return repr(value)
    if not value or _NEEDS_QUOTES.search(value) or _NUMBER.match(value):
        return _quote(value)
    return value


def _format_name(s: str) -> str:
    return _quote(s) if _NEEDS_QUOTES.search(s) else s


def _body(labels, properties) -> list[str]:
    out = [":" + _format_name(label) for label in labels]
    for key, values in properties.items():
        k = _format_name(key)
        out.extend(f"{k}:{format_value(v)}" for v in values)
    return out


def serialize_pg(graph: PropertyGraph) -> str:
    """Deterministic text: nodes first, then edges, single-space separated."""
    lines = []
    for node in graph.nodes.values():
        lines.append(" ".join([format_id(node.id), *_body(node.labels, node.properties)]))
    for edge in graph.edges:
        direction = "--" if edge.undirected else "->"
        head = [format_id(edge.source), direction, format_id(edge.destination)]
        lines.append(" ".join(head + _body(edge.labels, edge.properties)))
    return "".join(line + "\n" for line in lines)
