"""Dataset model: node tables, edges, clusterings, CSV ingestion, standardization.

Nodes arrive as a CSV with header ``id[,cluster],attr_1,...,attr_p``; edges
either as a separate ``source,target[,weight]`` CSV or as ``adj:<node_id>``
columns appended to the node file (adjacency form). Attribute values are
min-max rescaled to [0, 1] once at load; datasets are immutable afterwards.
"""

from __future__ import annotations

import csv
import io
import warnings
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, NamedTuple, TextIO

import numpy as np

ADJACENCY_PREFIX = "adj:"


class DatasetError(ValueError):
    """Raised when an input file violates the dataset contract."""


class ConstantColumnWarning(UserWarning):
    """A standardized attribute column is constant and maps to all zeros."""


class Edge(NamedTuple):
    source: str
    target: str
    weight: float = 1.0


class Degree(NamedTuple):
    in_degree: int
    out_degree: int
    total_degree: int


@dataclass(frozen=True)
class NodeTable:
    """Raw node records: ids, labels, optional cluster column, attribute rows."""

    ids: tuple[str, ...]
    labels: tuple[str, ...]
    clusters: tuple[str, ...] | None
    attribute_names: tuple[str, ...]
    raw: np.ndarray  # (n, p) float64, unstandardized

    def __post_init__(self) -> None:
        if len(set(self.ids)) != len(self.ids):
            raise DatasetError("duplicate node ids")
        if any(not i for i in self.ids):
            raise DatasetError("empty node id")
        if self.raw.shape != (len(self.ids), len(self.attribute_names)):
            raise DatasetError("attribute block shape does not match ids/names")

    @property
    def n(self) -> int:
        return len(self.ids)

    @property
    def p(self) -> int:
        return len(self.attribute_names)


@dataclass(frozen=True)
class Graph:
    """Directed weighted edge set over a fixed node universe."""

    nodes: tuple[str, ...]
    edges: tuple[Edge, ...]
    directed: bool = True

    def __post_init__(self) -> None:
        known = set(self.nodes)
        for e in self.edges:
            if e.source not in known or e.target not in known:
                raise DatasetError(f"edge references unknown node: {e.source}->{e.target}")
            if e.weight < 0:
                raise DatasetError(f"negative edge weight on {e.source}->{e.target}")


@dataclass(frozen=True)
class Clustering:
    """Cluster labels per node; label order is first appearance in node order."""

    cluster_ids: tuple[str, ...]
    assignment: dict[str, str]
    color_scheme_index: int = 0

    def __post_init__(self) -> None:
        ids = set(self.cluster_ids)
        if len(ids) != len(self.cluster_ids):
            raise DatasetError("duplicate cluster labels")
        for node, label in self.assignment.items():
            if label not in ids:
                raise DatasetError(f"node {node!r} assigned to unknown cluster {label!r}")
        if not 0 <= self.color_scheme_index <= 5:
            raise DatasetError("color_scheme_index must be in 0..5")

    @property
    def k(self) -> int:
        return len(self.cluster_ids)

    def label_of(self, node_id: str) -> str:
        return self.assignment[node_id]

    def members(self, label: str) -> list[str]:
        return [n for n, c in self.assignment.items() if c == label]


def clustering_from_labels(node_ids: Iterable[str], labels: Iterable[str],
                           color_scheme_index: int = 0) -> Clustering:
    """Build a Clustering with cluster ids ordered by first appearance."""
    assignment: dict[str, str] = {}
    order: list[str] = []
    seen: set[str] = set()
    for node, label in zip(node_ids, labels):
        assignment[node] = label
        if label not in seen:
            seen.add(label)
            order.append(label)
    return Clustering(tuple(order), assignment, color_scheme_index)


@dataclass(frozen=True)
class AttributeMatrix:
    """Standardized attribute matrix with an inclusion mask over columns.

    Every included column lies in [0, 1]. Excluding attributes produces a new
    view with a cleared mask; the values block is never edited in place.
    """

    values: np.ndarray  # (n, p) float64 in [0, 1]
    attribute_names: tuple[str, ...]
    included_mask: np.ndarray = field(default=None)  # type: ignore[assignment]

    def __post_init__(self) -> None:
        if self.included_mask is None:
            object.__setattr__(self, "included_mask",
                               np.ones(self.values.shape[1], dtype=bool))
        if len(set(self.attribute_names)) != len(self.attribute_names):
            raise DatasetError("duplicate attribute names")
        if self.values.shape[1] != len(self.attribute_names):
            raise DatasetError("attribute name count does not match columns")
        if self.included_mask.shape != (self.values.shape[1],):
            raise DatasetError("included_mask length does not match columns")
        self.values.setflags(write=False)
        self.included_mask.setflags(write=False)

    @property
    def n(self) -> int:
        return self.values.shape[0]

    @property
    def p(self) -> int:
        return self.values.shape[1]

    @property
    def included_count(self) -> int:
        return int(self.included_mask.sum())

    def included_values(self) -> np.ndarray:
        return self.values[:, self.included_mask]

    def included_names(self) -> tuple[str, ...]:
        return tuple(np.asarray(self.attribute_names)[self.included_mask])

    def with_mask(self, mask: np.ndarray) -> "AttributeMatrix":
        return replace(self, included_mask=np.array(mask, dtype=bool))

    def index_of(self, name: str) -> int:
        try:
            return self.attribute_names.index(name)
        except ValueError:
            raise DatasetError(f"unknown attribute {name!r}") from None


def standardize(table: NodeTable) -> AttributeMatrix:
    """Min-max rescale each raw column to [0, 1].

    Constant columns map to all zeros and are reported with a
    ConstantColumnWarning; they stay in the matrix so column indexing is
    stable for the significance panel.
    """
    raw = np.asarray(table.raw, dtype=float)
    lo = raw.min(axis=0)
    hi = raw.max(axis=0)
    span = hi - lo
    constant = span == 0
    safe_span = np.where(constant, 1.0, span)
    values = (raw - lo) / safe_span
    values[:, constant] = 0.0
    if constant.any():
        names = [table.attribute_names[j] for j in np.flatnonzero(constant)]
        warnings.warn(f"constant attribute columns standardized to zeros: {names}",
                      ConstantColumnWarning, stacklevel=2)
    return AttributeMatrix(values, table.attribute_names)


def degrees(graph: Graph) -> dict[str, Degree]:
    """Per-node incoming/outgoing/total edge counts (weights ignored)."""
    ins = {n: 0 for n in graph.nodes}
    outs = {n: 0 for n in graph.nodes}
    for e in graph.edges:
        outs[e.source] += 1
        ins[e.target] += 1
    return {n: Degree(ins[n], outs[n], ins[n] + outs[n]) for n in graph.nodes}


# ---------------------------------------------------------------------------
# CSV ingestion


def _open_rows(source: str | Path | TextIO) -> list[list[str]]:
    if hasattr(source, "read"):
        text = source.read()  # type: ignore[union-attr]
    else:
        path = Path(source)
        if not path.exists():
            raise DatasetError(f"file not found: {path}")
        text = path.read_text(encoding="utf-8")
    rows = [row for row in csv.reader(io.StringIO(text)) if row and any(c.strip() for c in row)]
    if not rows:
        raise DatasetError("empty input")
    return rows


def _parse_float(cell: str, context: str) -> float:
    try:
        return float(cell)
    except ValueError:
        raise DatasetError(f"non-numeric value {cell!r} in {context}") from None


def _split_node_header(header: list[str]) -> tuple[bool, list[str]]:
    if not header or header[0].strip().lower() != "id":
        raise DatasetError("nodes header must start with 'id'")
    rest = [h.strip() for h in header[1:]]
    has_cluster = bool(rest) and rest[0].lower() == "cluster"
    attr_names = rest[1:] if has_cluster else rest
    return has_cluster, attr_names


def parse_nodes(source: str | Path | TextIO) -> NodeTable:
    """Parse a node CSV with header ``id[,cluster],attr_1,...,attr_p``."""
    rows = _open_rows(source)
    has_cluster, attr_names = _split_node_header(rows[0])
    if len(attr_names) < 2:
        raise DatasetError("need at least 2 attribute columns for a 2D projection")
    ids: list[str] = []
    clusters: list[str] = []
    data: list[list[float]] = []
    width = 1 + (1 if has_cluster else 0) + len(attr_names)
    for row in rows[1:]:
        if len(row) != width:
            raise DatasetError(f"node row for {row[0]!r} has {len(row)} fields, expected {width}")
        node_id = row[0].strip()
        ids.append(node_id)
        offset = 1
        if has_cluster:
            clusters.append(row[1].strip())
            offset = 2
        data.append([_parse_float(c, f"attribute {attr_names[j]!r} of node {node_id!r}")
                     for j, c in enumerate(row[offset:])])
    return NodeTable(
        ids=tuple(ids),
        labels=tuple(ids),
        clusters=tuple(clusters) if has_cluster else None,
        attribute_names=tuple(attr_names),
        raw=np.asarray(data, dtype=float),
    )


def parse_edges(source: str | Path | TextIO, nodes: tuple[str, ...]) -> Graph:
    """Parse an edge CSV with header ``source,target[,weight]``."""
    rows = _open_rows(source)
    header = [h.strip().lower() for h in rows[0]]
    if header[:2] != ["source", "target"]:
        raise DatasetError("edges header must start with 'source,target'")
    edges: list[Edge] = []
    for row in rows[1:]:
        if len(row) not in (2, 3):
            raise DatasetError(f"edge row {row!r} must have 2 or 3 fields")
        weight = _parse_float(row[2], "edge weight") if len(row) == 3 else 1.0
        edges.append(Edge(row[0].strip(), row[1].strip(), weight))
    return Graph(nodes=nodes, edges=tuple(edges))


def load_dataset(nodes_source: str | Path | TextIO,
                 edges_source: str | Path | TextIO | None = None) -> tuple[NodeTable, Graph]:
    """Load a node CSV plus optional edge CSV.

    Edges referencing ids absent from the node file are a hard error: nodes
    without attributes have no position in any projection.
    """
    table = parse_nodes(nodes_source)
    if edges_source is None:
        graph = Graph(nodes=table.ids, edges=())
    else:
        graph = parse_edges(edges_source, table.ids)
    return table, graph


def load_adjacency_dataset(combined_source: str | Path | TextIO) -> tuple[NodeTable, Graph]:
    """Load a combined CSV whose trailing ``adj:<node_id>`` columns define edges.

    Entry (i, j) != 0 becomes a directed edge i->j with weight equal to the
    entry. The adjacency block must be square over the node set.
    """
    rows = _open_rows(combined_source)
    header = rows[0]
    if not header or header[0].strip().lower() != "id":
        raise DatasetError("nodes header must start with 'id'")
    rest = [h.strip() for h in header[1:]]
    has_cluster = bool(rest) and rest[0].lower() == "cluster"
    if has_cluster:
        rest = rest[1:]
    adj_start = next((j for j, name in enumerate(rest) if name.startswith(ADJACENCY_PREFIX)),
                     len(rest))
    attr_names = rest[:adj_start]
    adj_targets = [name[len(ADJACENCY_PREFIX):] for name in rest[adj_start:]]
    if any(not name.startswith(ADJACENCY_PREFIX) for name in rest[adj_start:]):
        raise DatasetError("adjacency columns must be contiguous and last")
    if len(attr_names) < 2:
        raise DatasetError("need at least 2 attribute columns for a 2D projection")

    ids: list[str] = []
    clusters: list[str] = []
    data: list[list[float]] = []
    adj_rows: list[list[float]] = []
    width = 1 + (1 if has_cluster else 0) + len(rest)
    for row in rows[1:]:
        if len(row) != width:
            raise DatasetError(f"row for {row[0]!r} has {len(row)} fields, expected {width}")
        node_id = row[0].strip()
        ids.append(node_id)
        offset = 2 if has_cluster else 1
        if has_cluster:
            clusters.append(row[1].strip())
        cells = row[offset:]
        data.append([_parse_float(c, f"attribute {attr_names[j]!r} of node {node_id!r}")
                     for j, c in enumerate(cells[:adj_start])])
        adj_rows.append([_parse_float(c, f"adjacency entry of node {node_id!r}")
                         for c in cells[adj_start:]])

    if set(adj_targets) != set(ids) or len(adj_targets) != len(ids):
        raise DatasetError("adjacency block is not square over the node set")
    adj = np.asarray(adj_rows, dtype=float)
    if (adj < 0).any():
        raise DatasetError("negative adjacency entry")

    table = NodeTable(
        ids=tuple(ids),
        labels=tuple(ids),
        clusters=tuple(clusters) if has_cluster else None,
        attribute_names=tuple(attr_names),
        raw=np.asarray(data, dtype=float),
    )
    # edge order: by source row, then adjacency column order
    edges = tuple(Edge(ids[i], adj_targets[j], float(adj[i, j]))
                  for i, j in np.argwhere(adj != 0))
    return table, Graph(nodes=table.ids, edges=edges)


def file_clustering(table: NodeTable, color_scheme_index: int = 0) -> Clustering | None:
    """Clustering from the optional cluster column, or None when absent."""
    if table.clusters is None:
        return None
    return clustering_from_labels(table.ids, table.clusters, color_scheme_index)
