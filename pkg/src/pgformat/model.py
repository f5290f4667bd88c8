"""In-memory property graph: nodes keyed by id, an edge multiset, set-valued
labels and properties.

Values are plain Python scalars (``str``, ``int``, ``float``).  Because Python
treats ``15 == 15.0`` as true, every comparison in this module goes through
:func:`value_key`, which tags a value with its type so integers and floats
never collapse into each other.
"""

from __future__ import annotations

import copy
import math
from collections import Counter
from collections.abc import Iterable, Iterator, Mapping
from dataclasses import dataclass, field
from typing import Union

Value = Union[str, int, float]
NodeId = Union[str, int]

INT64_MIN = -(2**63)
INT64_MAX = 2**63 - 1


def _check_text(s: str, what: str) -> None:
    if "\n" in s or "\r" in s:
        raise ValueError(f"{what} must not contain line breaks: {s!r}")
    try:
        s.encode("utf-8")
    except UnicodeEncodeError:
        raise ValueError(f"{what} is not encodable as UTF-8: {s!r}") from None


def check_value(value: object) -> Value:
    """Validate a property value and return it unchanged."""
    if isinstance(value, bool) or not isinstance(value, (str, int, float)):
        raise TypeError(f"property values must be str, int or float, got {type(value).__name__}")
    if isinstance(value, int):
        if not INT64_MIN <= value <= INT64_MAX:
            raise ValueError(f"integer value out of 64-bit range: {value}")
    elif isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"float values must be finite, got {value!r}")
    else:
        _check_text(value, "text value")
    return value


def check_node_id(node_id: object) -> NodeId:
    if isinstance(node_id, bool) or not isinstance(node_id, (str, int)):
        raise TypeError(f"node ids must be str or int, got {type(node_id).__name__}")
    if isinstance(node_id, int):
        if not INT64_MIN <= node_id <= INT64_MAX:
            raise ValueError(f"integer node id out of 64-bit range: {node_id}")
    else:
        if not node_id:
            raise ValueError("node id must not be empty")
        _check_text(node_id, "node id")
    return node_id


def check_label(label: object) -> str:
    if not isinstance(label, str):
        raise TypeError(f"labels must be str, got {type(label).__name__}")
    if not label:
        raise ValueError("labels must not be empty")
    _check_text(label, "label")
    return label


def value_key(value: Value) -> tuple[str, Value]:
    """Type-tagged comparison key: ``value_key(15) != value_key(15.0)``."""
    return (type(value).__name__, value)


def id_key(node_id: NodeId) -> tuple[str, NodeId]:
    return (type(node_id).__name__, node_id)


class PropertyMap(Mapping):
    """Ordered map from key to a non-empty, duplicate-free list of values.

    Insertion order of keys and values is kept so output is deterministic;
    ``==`` ignores both orders.
    """

    def __init__(self, items: Mapping[str, Iterable[Value]] | Iterable[tuple[str, Value]] | None = None):
        self._values: dict[str, list[Value]] = {}
        self._seen: dict[str, set[tuple[str, Value]]] = {}
        if items is None:
            return
        if isinstance(items, Mapping):
            for key, values in items.items():
                if isinstance(values, (str, int, float)):
                    raise TypeError(f"values for {key!r} must be a sequence, got a bare scalar")
                values = list(values)
                if not values:
                    raise ValueError(f"property {key!r} has no values")
                for v in values:
                    self.add(key, v)
        else:
            for key, v in items:
                self.add(key, v)

    def add(self, key: str, value: Value) -> bool:
        """Add one value under ``key``; returns False if it was already present."""
        if key not in self._values:
            if not isinstance(key, str):
                raise TypeError(f"property keys must be str, got {type(key).__name__}")
            if not key:
                raise ValueError("property keys must not be empty")
            _check_text(key, "property key")
        check_value(value)
        vk = value_key(value)
        seen = self._seen.setdefault(key, set())
        if vk in seen:
            return False
        seen.add(vk)
        self._values.setdefault(key, []).append(value)
        return True

    def update(self, other: Mapping[str, Iterable[Value]]) -> None:
        for key, values in other.items():
            for v in values:
                self.add(key, v)

    def __getitem__(self, key: str) -> tuple[Value, ...]:
        return tuple(self._values[key])

    def __iter__(self) -> Iterator[str]:
        return iter(self._values)

    def __len__(self) -> int:
        return len(self._values)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyMap):
            return NotImplemented
        return self._seen == other._seen

    __hash__ = None  # type: ignore[assignment]

    def frozen(self) -> frozenset:
        return frozenset((k, frozenset(s)) for k, s in self._seen.items())

    def num_values(self) -> int:
        return sum(len(v) for v in self._values.values())

    def __repr__(self) -> str:
        return f"PropertyMap({self._values!r})"


def _as_property_map(properties: Mapping[str, Iterable[Value]] | None) -> PropertyMap:
    if properties is None:
        return PropertyMap()
    if isinstance(properties, PropertyMap):
        return properties
    return PropertyMap(properties)


def _unique_labels(labels: Iterable[str]) -> list[str]:
    out: list[str] = []
    for label in labels:
        check_label(label)
        if label not in out:
            out.append(label)
    return out


@dataclass(eq=False)
class Node:
    id: NodeId
    labels: list[str] = field(default_factory=list)
    properties: PropertyMap = field(default_factory=PropertyMap)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Node):
            return NotImplemented
        return (
            id_key(self.id) == id_key(other.id)
            and set(self.labels) == set(other.labels)
            and self.properties == other.properties
        )

    __hash__ = None  # type: ignore[assignment]


@dataclass(eq=False)
class Edge:
    """An edge between two node ids.  For directed edges ``source`` is the tail."""

    source: NodeId
    destination: NodeId
    undirected: bool = False
    labels: list[str] = field(default_factory=list)
    properties: PropertyMap = field(default_factory=PropertyMap)

    def key(self) -> tuple:
        """Order-free identity used for multiset comparison."""
        ends = (id_key(self.source), id_key(self.destination))
        if self.undirected:
            ends = tuple(sorted(ends))
        return (self.undirected, ends, frozenset(self.labels), self.properties.frozen())

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Edge):
            return NotImplemented
        return self.key() == other.key()

    __hash__ = None  # type: ignore[assignment]


class PropertyGraph:
    """Nodes in first-seen order plus an ordered multiset of edges.

    ``merge_node`` and ``add_edge`` mutate in place; they are meant for the
    code that builds a graph.  Once handed out, treat the graph as a value and
    use the module-level functions of the same names, which copy.
    """

    def __init__(self) -> None:
        self.nodes: dict[NodeId, Node] = {}
        self.edges: list[Edge] = []

    def merge_node(
        self,
        node_id: NodeId,
        labels: Iterable[str] = (),
        properties: Mapping[str, Iterable[Value]] | None = None,
    ) -> Node:
        check_node_id(node_id)
        labels = _unique_labels(labels)
        properties = _as_property_map(properties)
        node = self.nodes.get(node_id)
        # 1 and "1" hash differently, but True == 1, so ids were checked above
        if node is None:
            node = Node(node_id)
            self.nodes[node_id] = node
        for label in labels:
            if label not in node.labels:
                node.labels.append(label)
        node.properties.update(properties)
        return node

    def add_edge(
        self,
        source: NodeId,
        destination: NodeId,
        undirected: bool = False,
        labels: Iterable[str] = (),
        properties: Mapping[str, Iterable[Value]] | None = None,
    ) -> Edge:
        check_node_id(source)
        check_node_id(destination)
        if not isinstance(undirected, bool):
            raise TypeError("undirected must be a bool")
        edge = Edge(source, destination, undirected, _unique_labels(labels), PropertyMap(properties or {}))
        for end in (source, destination):
            if end not in self.nodes:
                self.nodes[end] = Node(end)
        self.edges.append(edge)
        return edge

    def copy(self) -> PropertyGraph:
        return copy.deepcopy(self)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, PropertyGraph):
            return NotImplemented
        return graph_equal(self, other)

    __hash__ = None  # type: ignore[assignment]

    def __repr__(self) -> str:
        return f"<PropertyGraph nodes={len(self.nodes)} edges={len(self.edges)}>"

    def check(self) -> None:
        """Raise ValueError if any edge endpoint is missing from ``nodes``."""
        for i, edge in enumerate(self.edges):
            for end in (edge.source, edge.destination):
                if end not in self.nodes:
                    raise ValueError(f"edge {i} references unknown node {end!r}")


def merge_node(
    graph: PropertyGraph,
    node_id: NodeId,
    labels: Iterable[str] = (),
    properties: Mapping[str, Iterable[Value]] | None = None,
) -> PropertyGraph:
    """Return a copy of ``graph`` with the node added or unioned into the existing one."""
    g = graph.copy()
    g.merge_node(node_id, labels, copy.deepcopy(_as_property_map(properties)))
    return g


def add_edge(
    graph: PropertyGraph,
    source: NodeId,
    destination: NodeId,
    undirected: bool = False,
    labels: Iterable[str] = (),
    properties: Mapping[str, Iterable[Value]] | None = None,
) -> PropertyGraph:
    """Return a copy of ``graph`` with one more edge; missing endpoints become bare nodes."""
    g = graph.copy()
    g.add_edge(source, destination, undirected, labels, properties)
    return g


def graph_equal(a: PropertyGraph, b: PropertyGraph) -> bool:
    if len(a.nodes) != len(b.nodes) or len(a.edges) != len(b.edges):
        return False
    b_nodes = {id_key(k): n for k, n in b.nodes.items()}
    for node_id, node in a.nodes.items():
        other = b_nodes.get(id_key(node_id))
        if other is None or node != other:
            return False
    return Counter(e.key() for e in a.edges) == Counter(e.key() for e in b.edges)
