"""Exporters to Neo4j, Amazon Neptune and Oracle PGX bulk-load files.

None of the targets can hold everything the model can (multi-label edges,
undirected edges, multi-valued edge properties, mixed-type keys), so every
exporter is total and reports each lossy or transforming step as a
:class:`ConversionWarning` instead of failing.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field
from typing import Optional

from .model import Edge, NodeId, PropertyGraph, Value

UNDIRECTED_POLICIES = ("keep-once", "duplicate-reversed")
EDGE_LABEL_POLICIES = ("first-label", "join-with-underscore")

NODE_PREFIX = "node:"
EDGE_PREFIX = "edge:"
DEFAULT_EDGE_TYPE = "RELATED"

# warning kinds; the first three mark information that was dropped
DROPPED_LABEL = "dropped-label"
UNDIRECTED = "undirected"
DROPPED_VALUE = "dropped-value"
WIDENED_TYPE = "widened-type"
UNLABELED_EDGE = "unlabeled-edge"
ID_COLLISION = "id-collision"
LOSSY_KINDS = frozenset({DROPPED_LABEL, UNDIRECTED, DROPPED_VALUE})


@dataclass(frozen=True)
class ConversionOptions:
    undirected_policy: str = "keep-once"
    multilabel_edge_policy: str = "first-label"
    id_prefixing: bool = False

    def __post_init__(self) -> None:
        if self.undirected_policy not in UNDIRECTED_POLICIES:
            raise ValueError(f"undirected_policy must be one of {UNDIRECTED_POLICIES}")
        if self.multilabel_edge_policy not in EDGE_LABEL_POLICIES:
            raise ValueError(f"multilabel_edge_policy must be one of {EDGE_LABEL_POLICIES}")


@dataclass(frozen=True)
class ConversionWarning:
    kind: str
    message: str
    element: Optional[str] = None  # "node" or "edge"
    index: Optional[int] = None  # 0-based position in graph.nodes / graph.edges

    def __str__(self) -> str:
        where = f"{self.element} {self.index}: " if self.index is not None else ""
        return f"{where}{self.message}"


@dataclass
class ConversionOutput:
    files: dict[str, bytes] = field(default_factory=dict)
    warnings: list[ConversionWarning] = field(default_factory=list)


def _cell(s: str) -> str:
    if any(c in s for c in ',";\n\r'):
        return '"' + s.replace('"', '""') + '"'
    return s


def _csv(rows: Iterable[list[str]]) -> bytes:
    return "".join(",".join(_cell(c) for c in row) + "\n" for row in rows).encode("utf-8")


def _text(value: Value) -> str:
    return repr(value) if isinstance(value, float) else str(value)


@dataclass
class _Column:
    key: str
    kind: str  # "str", "int", "float" or "mixed"
    array: bool = False
    fits_int32: bool = True

    @property
    def widened(self) -> bool:
        return self.kind == "mixed"


def _columns(elements: Iterable, element: str, warnings: list[ConversionWarning]) -> dict[str, _Column]:
    """Per-key column type over every value in the graph, first-seen key order."""
    cols: dict[str, _Column] = {}
    for el in elements:
        for key, values in el.properties.items():
            for v in values:
                kind = type(v).__name__
                col = cols.get(key)
                if col is None:
                    col = cols[key] = _Column(key, kind)
                elif col.kind != kind:
                    col.kind = "mixed"
                if isinstance(v, int) and not -(2**31) <= v < 2**31:
                    col.fits_int32 = False
            if len(values) > 1:
                cols[key].array = True
    for col in cols.values():
        if col.widened:
            warnings.append(ConversionWarning(
                WIDENED_TYPE, f"{element} property {col.key!r} mixes value types; written as string", element
            ))
    return cols


class _Exporter:
    def __init__(self, graph: PropertyGraph, opts: Optional[ConversionOptions]):
        self.graph = graph
        self.opts = opts or ConversionOptions()
        self.warnings: list[ConversionWarning] = []
        self.node_ids = self._render_node_ids()

    def warn(self, kind: str, message: str, element: Optional[str] = None, index: Optional[int] = None) -> None:
        self.warnings.append(ConversionWarning(kind, message, element, index))

    def _render_node_ids(self) -> dict:
        out = {}
        seen: set[str] = set()
        for i, node_id in enumerate(self.graph.nodes):
            s = str(node_id)
            if self.opts.id_prefixing:
                s = NODE_PREFIX + s
            if s in seen:
                self.warn(ID_COLLISION, f"node id {node_id!r} renders as {s!r}, which is already taken", "node", i)
            seen.add(s)
            out[(type(node_id), node_id)] = s
        return out

    def node_id(self, node_id: NodeId) -> str:
        return self.node_ids[(type(node_id), node_id)]

    def edge_id(self, k: int) -> str:
        eid = f"e{k}"
        return EDGE_PREFIX + eid if self.opts.id_prefixing else eid

    def edge_label(self, i: int, edge: Edge, default: str) -> str:
        if not edge.labels:
            self.warn(UNLABELED_EDGE, f"edge has no label; written as {default!r}", "edge", i)
            return default
        if self.opts.multilabel_edge_policy == "join-with-underscore":
            return "_".join(edge.labels)
        for dropped in edge.labels[1:]:
            self.warn(DROPPED_LABEL, f"label {dropped!r} dropped (target allows one edge label)", "edge", i)
        return edge.labels[0]

    def oriented(self, i: int, edge: Edge) -> Iterator[tuple[str, str]]:
        """Endpoint pairs to emit for one edge under the undirected policy."""
        src, dst = self.node_id(edge.source), self.node_id(edge.destination)
        yield src, dst
        if edge.undirected:
            if self.opts.undirected_policy == "duplicate-reversed":
                yield dst, src
            else:
                self.warn(UNDIRECTED, "undirected edge written as directed source->destination", "edge", i)

    def output(self, files: dict[str, bytes]) -> ConversionOutput:
        return ConversionOutput(files, self.warnings)


_NEO4J_TYPES = {"str": "string", "int": "long", "float": "double", "mixed": "string"}


def _neo4j_header(col: _Column) -> str:
    return f"{col.key}:{_NEO4J_TYPES[col.kind]}{'[]' if col.array else ''}"


def _joined(properties, col: _Column) -> str:
    return ";".join(_text(v) for v in properties.get(col.key, ()))


def to_neo4j(graph: PropertyGraph, opts: Optional[ConversionOptions] = None) -> ConversionOutput:
    """``nodes.csv`` / ``edges.csv`` for ``neo4j-admin import``."""
    ex = _Exporter(graph, opts)
    node_cols = _columns(graph.nodes.values(), "node", ex.warnings)
    edge_cols = _columns(graph.edges, "edge", ex.warnings)

    nodes = [["id:ID", ":LABEL", *(_neo4j_header(c) for c in node_cols.values())]]
    for node in graph.nodes.values():
        nodes.append([ex.node_id(node.id), ";".join(node.labels), *(_joined(node.properties, c) for c in node_cols.values())])

    edges = [[":START_ID", ":TYPE", ":END_ID", *(_neo4j_header(c) for c in edge_cols.values())]]
    for i, edge in enumerate(graph.edges):
        label = ex.edge_label(i, edge, DEFAULT_EDGE_TYPE)
        cells = [_joined(edge.properties, c) for c in edge_cols.values()]
        for src, dst in ex.oriented(i, edge):
            edges.append([src, label, dst, *cells])
    return ex.output({"nodes.csv": _csv(nodes), "edges.csv": _csv(edges)})


def _neptune_type(col: _Column) -> str:
    if col.kind == "int":
        return "Int" if col.fits_int32 else "Long"
    return "Double" if col.kind == "float" else "String"


def to_neptune(graph: PropertyGraph, opts: Optional[ConversionOptions] = None) -> ConversionOutput:
    """``vertices.csv`` / ``edges.csv`` in the Neptune Gremlin load format."""
    ex = _Exporter(graph, opts)
    node_cols = _columns(graph.nodes.values(), "node", ex.warnings)
    edge_cols = _columns(graph.edges, "edge", ex.warnings)

    vertices = [["~id", "~label", *(f"{c.key}:{_neptune_type(c)}" for c in node_cols.values())]]
    for node in graph.nodes.values():
        vertices.append([ex.node_id(node.id), ";".join(node.labels), *(_joined(node.properties, c) for c in node_cols.values())])

    edges = [["~id", "~from", "~to", "~label", *(f"{c.key}:{_neptune_type(c)}" for c in edge_cols.values())]]
    k = 0
    for i, edge in enumerate(graph.edges):
        label = ex.edge_label(i, edge, DEFAULT_EDGE_TYPE)
        cells = []
        for col in edge_cols.values():
            values = edge.properties.get(col.key, ())
            for dropped in values[1:]:
                ex.warn(DROPPED_VALUE, f"value {dropped!r} of {col.key!r} dropped (edge properties are single-valued)", "edge", i)
            cells.append(_text(values[0]) if values else "")
        for src, dst in ex.oriented(i, edge):
            k += 1
            edges.append([ex.edge_id(k), src, dst, label, *cells])
    return ex.output({"vertices.csv": _csv(vertices), "edges.csv": _csv(edges)})


# Oracle flat-file value type codes
PGX_TYPE_CODES = {"str": "1", "int": "7", "float": "4", "mixed": "1"}
_PGX_TYPE_NAMES = {"str": "string", "int": "long", "float": "double", "mixed": "string"}


def _triples(properties, cols: dict[str, _Column]) -> list[list[str]]:
    rows = []
    for key, values in properties.items():
        code = PGX_TYPE_CODES[cols[key].kind]
        rows.extend([key, code, _text(v)] for v in values)
    return rows or [["", "", ""]]


def to_pgx(graph: PropertyGraph, opts: Optional[ConversionOptions] = None) -> ConversionOutput:
    """``graph.opv`` / ``graph.ope`` flat files plus a ``graph.json`` loader config."""
    ex = _Exporter(graph, opts)
    node_cols = _columns(graph.nodes.values(), "node", ex.warnings)
    edge_cols = _columns(graph.edges, "edge", ex.warnings)

    opv = []
    for node in graph.nodes.values():
        nid = ex.node_id(node.id)
        opv.extend([nid, *t] for t in _triples(node.properties, node_cols))

    ope = []
    k = 0
    for i, edge in enumerate(graph.edges):
        label = ex.edge_label(i, edge, "")
        triples = _triples(edge.properties, edge_cols)
        for src, dst in ex.oriented(i, edge):
            k += 1
            ope.extend([ex.edge_id(k), src, dst, label, *t] for t in triples)

    numeric_ids = not ex.opts.id_prefixing and all(isinstance(n, int) for n in graph.nodes)
    config = {
        "format": "flat_file",
        "vertex_uris": ["graph.opv"],
        "edge_uris": ["graph.ope"],
        "separator": ",",
        "vertex_id_type": "long" if numeric_ids else "string",
        "edge_label": True,
        "vertex_props": [{"name": c.key, "type": _PGX_TYPE_NAMES[c.kind]} for c in node_cols.values()],
        "edge_props": [{"name": c.key, "type": _PGX_TYPE_NAMES[c.kind]} for c in edge_cols.values()],
    }
    files = {
        "graph.opv": _csv(opv),
        "graph.ope": _csv(ope),
        "graph.json": (json.dumps(config, indent=2, ensure_ascii=False) + "\n").encode("utf-8"),
    }
    return ex.output(files)


TARGETS = {"neo4j": to_neo4j, "neptune": to_neptune, "pgx": to_pgx}
