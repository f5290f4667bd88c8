"""Property graph model with PG / JSON-PG serialization and bulk-load exporters."""

from .diagnostics import ParseResult, SourceDiagnostic
from .model import Edge, Node, PropertyGraph, PropertyMap, add_edge, graph_equal, merge_node
from .text import parse_pg, serialize_pg

__all__ = [
    "Edge",
    "Node",
    "ParseResult",
    "PropertyGraph",
    "PropertyMap",
    "SourceDiagnostic",
    "add_edge",
    "graph_equal",
    "merge_node",
    "parse_pg",
    "serialize_pg",
]
