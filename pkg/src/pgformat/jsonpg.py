"""JSON-PG reader and canonical writer.

    {"nodes": [{"id": 101, "labels": ["Person"], "properties": {"age": [15]}}],
     "edges": [{"from": 101, "to": 102, "undirected": true, "labels": [], "properties": {}}]}

Structural errors are reported at the line/column of the enclosing JSON
object, so the decoder below records where every object starts.
"""

from __future__ import annotations

import json
import json.decoder
import json.scanner
import math
from typing import Any

from .diagnostics import ParseResult, SourceDiagnostic
from .model import INT64_MAX, INT64_MIN, NodeId, PropertyGraph, Value, check_label, check_value

NODE_MEMBERS = ("id", "labels", "properties")
EDGE_MEMBERS = ("from", "to", "undirected", "labels", "properties")


class _Obj(dict):
    __slots__ = ("pos", "duplicates")


def _pairs(pairs: list[tuple[str, Any]]) -> _Obj:
    obj = _Obj()
    obj.pos = 0
    obj.duplicates = []
    for k, v in pairs:
        if k in obj:
            obj.duplicates.append(k)
        obj[k] = v
    return obj


def _parse_object(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo=None):
    _, end = s_and_end
    obj, new_end = json.decoder.JSONObject(s_and_end, strict, scan_once, object_hook, object_pairs_hook, memo)
    obj.pos = end - 1
    return obj, new_end


class _PositionDecoder(json.JSONDecoder):
    def __init__(self) -> None:
        super().__init__(object_pairs_hook=_pairs, parse_constant=float)
        self.parse_object = _parse_object
        # the C scanner ignores parse_object
        self.scan_once = json.scanner.py_make_scanner(self)


class _Invalid(Exception):
    def __init__(self, obj: Any, message: str):
        super().__init__(message)
        self.obj = obj
        self.message = message


def _type_name(v: Any) -> str:
    if v is None:
        return "null"
    if isinstance(v, bool):
        return "boolean"
    if isinstance(v, (int, float)):
        return "number"
    if isinstance(v, str):
        return "string"
    if isinstance(v, list):
        return "array"
    return "object"


class _Reader:
    def __init__(self, text: str, strict: bool, lenient: bool):
        self.text = text
        self.strict = strict
        self.lenient = lenient
        self.diagnostics: list[SourceDiagnostic] = []

    def position(self, obj: Any) -> tuple[int, int]:
        pos = getattr(obj, "pos", 0)
        line = self.text.count("\n", 0, pos) + 1
        return line, pos - (self.text.rfind("\n", 0, pos) + 1) + 1

    def report(self, obj: Any, message: str, severity: str = "error") -> None:
        line, col = self.position(obj)
        self.diagnostics.append(SourceDiagnostic(line, col, message, severity))

    def check_members(self, obj: _Obj, allowed: tuple[str, ...], where: str) -> None:
        for key in obj.duplicates:
            raise _Invalid(obj, f"{where}: duplicate member {key!r}")
        for key in obj:
            if key not in allowed:
                if self.lenient:
                    self.report(obj, f"{where}: unknown member {key!r} ignored", "warning")
                else:
                    raise _Invalid(obj, f"{where}: unknown member {key!r}")

    def node_id(self, obj: _Obj, member: str, where: str) -> NodeId:
        if member not in obj:
            raise _Invalid(obj, f"{where}: missing required member {member!r}")
        v = obj[member]
        if isinstance(v, bool) or not isinstance(v, (str, int, float)):
            raise _Invalid(obj, f"{where}.{member}: expected string or number, got {_type_name(v)}")
        if isinstance(v, float):
            if not (math.isfinite(v) and v.is_integer()):
                raise _Invalid(obj, f"{where}.{member}: numeric node IDs must be whole numbers, got {v!r}")
            v = int(v)
        if isinstance(v, int):
            if not INT64_MIN <= v <= INT64_MAX:
                raise _Invalid(obj, f"{where}.{member}: node ID out of 64-bit range: {v}")
            return v
        if not v:
            raise _Invalid(obj, f"{where}.{member}: node ID must not be empty")
        if "\n" in v or "\r" in v:
            raise _Invalid(obj, f"{where}.{member}: node ID must not contain line breaks")
        return v

    def labels(self, obj: _Obj, where: str) -> list[str]:
        labels = obj.get("labels", [])
        if not isinstance(labels, list):
            raise _Invalid(obj, f"{where}.labels: expected array, got {_type_name(labels)}")
        for i, label in enumerate(labels):
            if not isinstance(label, str):
                raise _Invalid(obj, f"{where}.labels[{i}]: expected string, got {_type_name(label)}")
            try:
                check_label(label)
            except ValueError as e:
                raise _Invalid(obj, f"{where}.labels[{i}]: {e}") from None
        return labels

    def properties(self, obj: _Obj, where: str) -> dict[str, list[Value]]:
        props = obj.get("properties", {})
        if not isinstance(props, dict):
            raise _Invalid(obj, f"{where}.properties: expected object, got {_type_name(props)}")
        for key in getattr(props, "duplicates", ()):
            raise _Invalid(props, f"{where}.properties: duplicate key {key!r}")
        out: dict[str, list[Value]] = {}
        for key, values in props.items():
            here = f"{where}.properties[{key!r}]"
            if not key:
                raise _Invalid(props, f"{where}.properties: empty property key")
            if not isinstance(values, list):
                if self.lenient and not isinstance(values, dict):
                    self.report(props, f"{here}: bare value wrapped in an array", "warning")
                    values = [values]
                else:
                    raise _Invalid(props, f"{here}: property values must be an array, got {_type_name(values)}")
            if not values:
                raise _Invalid(props, f"{here}: property value array is empty")
            for v in values:
                if isinstance(v, bool) or not isinstance(v, (str, int, float)):
                    raise _Invalid(props, f"{here}: values must be strings or numbers, got {_type_name(v)}")
                try:
                    check_value(v)
                except ValueError as e:
                    raise _Invalid(props, f"{here}: {e}") from None
            out[key] = values
        return out

    def read(self) -> ParseResult:
        try:
            doc = _PositionDecoder().decode(self.text)
        except json.JSONDecodeError as e:
            return ParseResult(None, [SourceDiagnostic(e.lineno, e.colno, f"malformed JSON: {e.msg}")])
        graph = PropertyGraph()
        if not isinstance(doc, dict):
            self.report(doc, f"document must be a JSON object, got {_type_name(doc)}")
            return ParseResult(None, self.diagnostics)
        try:
            self.check_members(doc, ("nodes", "edges"), "document")
        except _Invalid as e:
            self.report(e.obj, e.message)
        declared = set()
        endpoints = []
        for section in ("nodes", "edges"):
            items = doc.get(section, [])
            if not isinstance(items, list):
                self.report(doc, f"{section}: expected array, got {_type_name(items)}")
                continue
            for i, obj in enumerate(items):
                where = f"{section}[{i}]"
                if not isinstance(obj, dict):
                    self.report(doc, f"{where}: expected object, got {_type_name(obj)}")
                    continue
                try:
                    if section == "nodes":
                        self.check_members(obj, NODE_MEMBERS, where)
                        node_id = self.node_id(obj, "id", where)
                        graph.merge_node(node_id, self.labels(obj, where), self.properties(obj, where))
                        declared.add((type(node_id), node_id))
                    else:
                        self.check_members(obj, EDGE_MEMBERS, where)
                        source = self.node_id(obj, "from", where)
                        destination = self.node_id(obj, "to", where)
                        undirected = obj.get("undirected", False)
                        if not isinstance(undirected, bool):
                            raise _Invalid(obj, f"{where}.undirected: expected boolean, got {_type_name(undirected)}")
                        graph.add_edge(source, destination, undirected, self.labels(obj, where), self.properties(obj, where))
                        endpoints.extend((obj, where, end) for end in (source, destination))
                except _Invalid as e:
                    self.report(e.obj, e.message)
                except (TypeError, ValueError) as e:
                    self.report(obj, f"{where}: {e}")
        if self.strict:
            for obj, where, end in endpoints:
                if (type(end), end) not in declared:
                    self.report(obj, f"{where}: endpoint {end!r} is not declared in nodes")
        if any(d.severity == "error" for d in self.diagnostics):
            return ParseResult(None, self.diagnostics)
        return ParseResult(graph, self.diagnostics)


def read_json_pg(text: str, strict: bool = False, lenient: bool = False) -> ParseResult:
    """Read a JSON-PG document.

    ``lenient`` turns unknown members into warnings and wraps bare property
    values in arrays.  ``strict`` requires every edge endpoint to appear in
    ``nodes``.
    """
    if strict and lenient:
        raise ValueError("strict and lenient are mutually exclusive")
    return _Reader(text, strict, lenient).read()


def to_document(graph: PropertyGraph) -> dict:
    nodes = []
    for node in graph.nodes.values():
        nodes.append({
            "id": node.id,
            "labels": list(node.labels),
            "properties": {k: list(v) for k, v in node.properties.items()},
        })
    edges = []
    for edge in graph.edges:
        obj: dict[str, Any] = {"from": edge.source, "to": edge.destination}
        if edge.undirected:
            obj["undirected"] = True
        obj["labels"] = list(edge.labels)
        obj["properties"] = {k: list(v) for k, v in edge.properties.items()}
        edges.append(obj)
    return {"nodes": nodes, "edges": edges}


def write_json_pg(graph: PropertyGraph) -> str:
    return json.dumps(to_document(graph), indent=2, ensure_ascii=False, allow_nan=False) + "\n"
